/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The usinv authors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "usinv/container.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace usinv {

namespace {

constexpr char kMagic[8] = {'U', 'S', 'R', 'F', '0', '0', '0', '1'};

std::int64_t element_count(const std::vector<std::int64_t>& shape) {
  std::int64_t n = 1;
  for (std::int64_t s : shape) {
    if (s < 0) throw std::invalid_argument("container: negative shape extent");
    n *= s;
  }
  return n;
}

void put_u64_le(std::ostream& os, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = (unsigned char)((v >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t get_u64_le(std::istream& is) {
  unsigned char buf[8];
  is.read(reinterpret_cast<char*>(buf), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(buf[i]) << (8 * i);
  return v;
}

}  // namespace

void ContainerWriter::add_raw(const std::string& name, const char* dtype,
                              std::size_t item_size,
                              const std::vector<std::int64_t>& shape,
                              const void* data) {
  for (const auto& rec : arrays_)
    if (rec.at("name") == name)
      throw std::invalid_argument("container: duplicate array name '" + name + "'");
  const std::int64_t count = element_count(shape);
  const std::size_t nbytes = std::size_t(count) * item_size;
  nlohmann::json rec;
  rec["name"] = name;
  rec["dtype"] = dtype;
  rec["shape"] = shape;
  rec["offset"] = blob_.size();
  rec["nbytes"] = nbytes;
  arrays_.push_back(std::move(rec));
  if (nbytes > 0) blob_.append(reinterpret_cast<const char*>(data), nbytes);
}

void ContainerWriter::add_f32(const std::string& name,
                              const std::vector<std::int64_t>& shape,
                              std::span<const float> data) {
  if (std::int64_t(data.size()) != element_count(shape))
    throw std::invalid_argument("container: data length does not match shape");
  add_raw(name, "f32", sizeof(float), shape, data.data());
}

void ContainerWriter::add_f64(const std::string& name,
                              const std::vector<std::int64_t>& shape,
                              std::span<const double> data) {
  if (std::int64_t(data.size()) != element_count(shape))
    throw std::invalid_argument("container: data length does not match shape");
  add_raw(name, "f64", sizeof(double), shape, data.data());
}

void ContainerWriter::write(const std::string& path) const {
  nlohmann::json manifest = meta_;
  manifest["endianness"] = "little";
  manifest["arrays"] = arrays_;
  const std::string text = manifest.dump();

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("container: cannot open '" + path + "' for writing");
  os.write(kMagic, sizeof(kMagic));
  put_u64_le(os, text.size());
  os.write(text.data(), std::streamsize(text.size()));
  os.write(blob_.data(), std::streamsize(blob_.size()));
  os.flush();
  if (!os) throw std::runtime_error("container: write to '" + path + "' failed");
}

ContainerReader ContainerReader::open(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("container: cannot open '" + path + "'");

  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("container: bad magic in '" + path + "'");

  const std::uint64_t manifest_len = get_u64_le(is);
  if (!is) throw std::runtime_error("container: truncated header in '" + path + "'");
  std::string text(manifest_len, '\0');
  is.read(text.data(), std::streamsize(manifest_len));
  if (!is) throw std::runtime_error("container: truncated manifest in '" + path + "'");

  ContainerReader reader;
  try {
    reader.meta_ = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("container: manifest is not valid JSON: " + std::string(e.what()));
  }
  if (reader.meta_.value("endianness", "") != "little")
    throw std::runtime_error("container: unsupported endianness tag");
  if (!reader.meta_.contains("arrays") || !reader.meta_["arrays"].is_array())
    throw std::runtime_error("container: manifest lacks an array table");

  reader.blob_.assign(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());

  for (const auto& rec : reader.meta_["arrays"]) {
    const std::size_t offset = rec.at("offset").get<std::size_t>();
    const std::size_t nbytes = rec.at("nbytes").get<std::size_t>();
    if (offset + nbytes > reader.blob_.size())
      throw std::runtime_error("container: array '" + rec.at("name").get<std::string>() +
                               "' extends past end of file");
  }
  return reader;
}

const nlohmann::json& ContainerReader::record(const std::string& name) const {
  for (const auto& rec : meta_["arrays"])
    if (rec.at("name") == name) return rec;
  throw std::runtime_error("container: no array named '" + name + "'");
}

bool ContainerReader::has_array(const std::string& name) const {
  for (const auto& rec : meta_["arrays"])
    if (rec.at("name") == name) return true;
  return false;
}

std::vector<std::int64_t> ContainerReader::shape(const std::string& name) const {
  return record(name).at("shape").get<std::vector<std::int64_t>>();
}

void ContainerReader::check_record(const nlohmann::json& rec, const char* dtype,
                                   std::size_t item_size, std::size_t& offset,
                                   std::size_t& count) const {
  if (rec.at("dtype") != dtype)
    throw std::runtime_error("container: array '" + rec.at("name").get<std::string>() +
                             "' has dtype " + rec.at("dtype").get<std::string>() +
                             ", expected " + dtype);
  offset = rec.at("offset").get<std::size_t>();
  const std::size_t nbytes = rec.at("nbytes").get<std::size_t>();
  if (nbytes % item_size != 0)
    throw std::runtime_error("container: array byte length not a multiple of item size");
  count = nbytes / item_size;
}

std::vector<float> ContainerReader::read_f32(const std::string& name) const {
  std::size_t offset = 0, count = 0;
  check_record(record(name), "f32", sizeof(float), offset, count);
  std::vector<float> out(count);
  std::memcpy(out.data(), blob_.data() + offset, count * sizeof(float));
  return out;
}

std::vector<double> ContainerReader::read_f64(const std::string& name) const {
  std::size_t offset = 0, count = 0;
  check_record(record(name), "f64", sizeof(double), offset, count);
  std::vector<double> out(count);
  std::memcpy(out.data(), blob_.data() + offset, count * sizeof(double));
  return out;
}

}  // namespace usinv
