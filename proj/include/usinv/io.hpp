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

#include <string>

#include <json.hpp>

#include "usinv/core.hpp"

namespace usinv {

/// Everything one RF file describes: probe, firing sequence, samples.
struct Acquisition {
  TransducerGeometry geometry;
  TransmitScheme scheme;
  RFDataCube data;
};

/**
 * Writes an acquisition to a single container file. Geometry, scheme, and
 * gain curve live in the manifest; RF samples are stored as one f32 array.
 * `extra_meta`, if given, is merged under the "notes" key.
 */
void write_rf_file(const std::string& path, const Acquisition& acq,
                   const nlohmann::json& extra_meta = nlohmann::json());

/// Inverse of write_rf_file; round trips samples and metadata bit exactly.
Acquisition read_rf_file(const std::string& path);

/// Scalar image on a rectilinear pixel grid. values(i, j) is depth row i,
/// lateral column j; axes hold the pixel center coordinates in meters.
struct ImageFile {
  Eigen::MatrixXd values;
  Eigen::VectorXd x_axis;
  Eigen::VectorXd z_axis;
  nlohmann::json meta;
};

void write_image_file(const std::string& path, const ImageFile& image);
ImageFile read_image_file(const std::string& path);

}  // namespace usinv
