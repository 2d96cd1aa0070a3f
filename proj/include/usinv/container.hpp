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

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace usinv {

/**
 * Single-file container: 8-byte magic "USRF0001", a little-endian uint64
 * manifest byte length, the JSON manifest, then one raw data blob holding
 * all arrays back to back. The manifest carries arbitrary metadata plus an
 * "arrays" table of {name, dtype, shape, offset, nbytes} records, offsets
 * relative to the blob start. Numeric metadata survives a write/read cycle
 * bit exactly.
 */
class ContainerWriter {
 public:
  /// Mutable metadata root; array records are added under "arrays".
  nlohmann::json& meta() { return meta_; }

  void add_f32(const std::string& name, const std::vector<std::int64_t>& shape,
               std::span<const float> data);
  void add_f64(const std::string& name, const std::vector<std::int64_t>& shape,
               std::span<const double> data);

  /// Serializes the container. Throws std::runtime_error on IO failure.
  void write(const std::string& path) const;

 private:
  void add_raw(const std::string& name, const char* dtype, std::size_t item_size,
               const std::vector<std::int64_t>& shape, const void* data);

  nlohmann::json meta_ = nlohmann::json::object();
  nlohmann::json arrays_ = nlohmann::json::array();
  std::string blob_;
};

class ContainerReader {
 public:
  /// Loads and checks magic, manifest framing, and array table consistency.
  /// Throws std::runtime_error on malformed input or IO failure.
  static ContainerReader open(const std::string& path);

  const nlohmann::json& meta() const { return meta_; }
  bool has_array(const std::string& name) const;
  std::vector<std::int64_t> shape(const std::string& name) const;
  std::vector<float> read_f32(const std::string& name) const;
  std::vector<double> read_f64(const std::string& name) const;

 private:
  const nlohmann::json& record(const std::string& name) const;
  void check_record(const nlohmann::json& rec, const char* dtype,
                    std::size_t item_size, std::size_t& offset,
                    std::size_t& count) const;

  nlohmann::json meta_;
  std::string blob_;
};

}  // namespace usinv
