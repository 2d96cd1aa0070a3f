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

#include "usinv/io.hpp"

#include <stdexcept>

#include "usinv/container.hpp"

namespace usinv {

namespace {

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& a) {
  Eigen::VectorXd v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[Eigen::Index(i)] = a[i].get<double>();
  return v;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& rows) {
  const Eigen::Index n_rows = Eigen::Index(rows.size());
  const Eigen::Index n_cols = n_rows > 0 ? Eigen::Index(rows[0].size()) : 0;
  Eigen::MatrixXd m(n_rows, n_cols);
  for (Eigen::Index r = 0; r < n_rows; ++r) {
    if (Eigen::Index(rows[r].size()) != n_cols)
      throw std::runtime_error("rf file: ragged matrix in manifest");
    for (Eigen::Index c = 0; c < n_cols; ++c) m(r, c) = rows[r][c].get<double>();
  }
  return m;
}

}  // namespace

void write_rf_file(const std::string& path, const Acquisition& acq,
                   const nlohmann::json& extra_meta) {
  ContainerWriter writer;
  nlohmann::json& meta = writer.meta();
  meta["kind"] = "rf";

  nlohmann::json geom;
  geom["element_positions_x"] = vector_to_json(acq.geometry.element_positions.row(0));
  geom["element_positions_z"] = vector_to_json(acq.geometry.element_positions.row(1));
  geom["element_width_nominal"] = acq.geometry.element_width_nominal;
  geom["center_frequency"] = acq.geometry.center_frequency;
  geom["sampling_frequency"] = acq.geometry.sampling_frequency;
  meta["geometry"] = std::move(geom);

  nlohmann::json scheme;
  scheme["delays"] = matrix_to_json(acq.scheme.delays);
  scheme["apodization"] = matrix_to_json(acq.scheme.apodization);
  scheme["initial_time"] = acq.scheme.initial_time;
  scheme["n_fast_time"] = acq.scheme.n_fast_time;
  nlohmann::json waveforms = nlohmann::json::array();
  for (const Waveform& wf : acq.scheme.waveforms) {
    nlohmann::json w;
    w["sample_rate"] = wf.sample_rate;
    w["start_time"] = wf.start_time;
    w["samples"] = vector_to_json(wf.samples);
    waveforms.push_back(std::move(w));
  }
  scheme["waveforms"] = std::move(waveforms);
  meta["scheme"] = std::move(scheme);

  meta["tgc"] = vector_to_json(acq.data.tgc_curve);
  if (!extra_meta.is_null()) meta["notes"] = extra_meta;

  writer.add_f32("rf", {acq.data.n_tx, acq.data.n_ft, acq.data.n_ch},
                 std::span<const float>(acq.data.samples));
  writer.write(path);
}

Acquisition read_rf_file(const std::string& path) {
  const ContainerReader reader = ContainerReader::open(path);
  const nlohmann::json& meta = reader.meta();
  if (meta.value("kind", "") != "rf")
    throw std::runtime_error("rf file: '" + path + "' is not an rf container");

  Acquisition acq;
  const nlohmann::json& geom = meta.at("geometry");
  const Eigen::VectorXd ex = vector_from_json(geom.at("element_positions_x"));
  const Eigen::VectorXd ez = vector_from_json(geom.at("element_positions_z"));
  if (ex.size() != ez.size())
    throw std::runtime_error("rf file: element coordinate arrays disagree in length");
  acq.geometry.element_positions.resize(2, ex.size());
  acq.geometry.element_positions.row(0) = ex;
  acq.geometry.element_positions.row(1) = ez;
  acq.geometry.element_width_nominal = geom.at("element_width_nominal").get<double>();
  acq.geometry.center_frequency = geom.at("center_frequency").get<double>();
  acq.geometry.sampling_frequency = geom.at("sampling_frequency").get<double>();

  const nlohmann::json& scheme = meta.at("scheme");
  acq.scheme.delays = matrix_from_json(scheme.at("delays"));
  acq.scheme.apodization = matrix_from_json(scheme.at("apodization"));
  acq.scheme.initial_time = scheme.at("initial_time").get<double>();
  acq.scheme.n_fast_time = scheme.at("n_fast_time").get<int>();
  for (const auto& w : scheme.at("waveforms")) {
    Waveform wf;
    wf.sample_rate = w.at("sample_rate").get<double>();
    wf.start_time = w.at("start_time").get<double>();
    wf.samples = vector_from_json(w.at("samples"));
    acq.scheme.waveforms.push_back(std::move(wf));
  }

  const auto shape = reader.shape("rf");
  if (shape.size() != 3)
    throw std::runtime_error("rf file: rf array is not three dimensional");
  acq.data.n_tx = int(shape[0]);
  acq.data.n_ft = int(shape[1]);
  acq.data.n_ch = int(shape[2]);
  acq.data.samples = reader.read_f32("rf");
  acq.data.tgc_curve = vector_from_json(meta.at("tgc"));
  return acq;
}

void write_image_file(const std::string& path, const ImageFile& image) {
  ContainerWriter writer;
  nlohmann::json& meta = writer.meta();
  meta["kind"] = "image";
  if (!image.meta.is_null()) meta["notes"] = image.meta;

  // Row-major pixel block, depth rows outer.
  std::vector<double> pixels(std::size_t(image.values.rows()) * image.values.cols());
  for (Eigen::Index i = 0; i < image.values.rows(); ++i)
    for (Eigen::Index j = 0; j < image.values.cols(); ++j)
      pixels[std::size_t(i) * image.values.cols() + j] = image.values(i, j);

  writer.add_f64("pixels", {image.values.rows(), image.values.cols()},
                 std::span<const double>(pixels));
  std::vector<double> xs(image.x_axis.data(), image.x_axis.data() + image.x_axis.size());
  std::vector<double> zs(image.z_axis.data(), image.z_axis.data() + image.z_axis.size());
  writer.add_f64("x_axis", {image.x_axis.size()}, std::span<const double>(xs));
  writer.add_f64("z_axis", {image.z_axis.size()}, std::span<const double>(zs));
  writer.write(path);
}

ImageFile read_image_file(const std::string& path) {
  const ContainerReader reader = ContainerReader::open(path);
  if (reader.meta().value("kind", "") != "image")
    throw std::runtime_error("image file: '" + path + "' is not an image container");

  ImageFile image;
  const auto shape = reader.shape("pixels");
  if (shape.size() != 2)
    throw std::runtime_error("image file: pixel array is not two dimensional");
  const std::vector<double> pixels = reader.read_f64("pixels");
  image.values.resize(shape[0], shape[1]);
  for (Eigen::Index i = 0; i < shape[0]; ++i)
    for (Eigen::Index j = 0; j < shape[1]; ++j)
      image.values(i, j) = pixels[std::size_t(i) * shape[1] + j];

  const std::vector<double> xs = reader.read_f64("x_axis");
  const std::vector<double> zs = reader.read_f64("z_axis");
  image.x_axis = Eigen::Map<const Eigen::VectorXd>(xs.data(), Eigen::Index(xs.size()));
  image.z_axis = Eigen::Map<const Eigen::VectorXd>(zs.data(), Eigen::Index(zs.size()));
  if (reader.meta().contains("notes")) image.meta = reader.meta().at("notes");
  return image;
}

}  // namespace usinv
