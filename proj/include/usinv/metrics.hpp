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

#include <Eigen/Core>

#include "usinv/beamform.hpp"
#include "usinv/core.hpp"

namespace usinv {

/// Boolean pixel selection over an image; must select at least one pixel.
struct RegionMask {
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> mask;

  Eigen::Index count() const { return mask.count(); }
};

/**
 * Generalized contrast-to-noise ratio: one minus the overlap of the two
 * regions' intensity histograms, binned over the [min, max] range of their
 * union. 0 when the regions carry identical value distributions, 1 when
 * their supports are disjoint. The overlap is accumulated in exact integer
 * counts, so those two poles are exact.
 * Throws std::invalid_argument on empty, overlapping, or mis-shaped masks.
 */
double gcnr(const Eigen::MatrixXd& image, const RegionMask& region_a,
            const RegionMask& region_b, int bins = 256);

/// Mean squared difference over the full cube. Throws on shape mismatch.
double rf_mse(const RFDataCube& observed, const RFDataCube& predicted);

/**
 * DAS image of the residual cube (observed - predicted): demodulates the
 * difference at the probe's carrier, beamforms every transmit, compounds,
 * and log-compresses. A zero residual propagates the "empty image" error.
 */
Eigen::MatrixXd residual_image(const RFDataCube& observed, const RFDataCube& predicted,
                               const TransducerGeometry& geometry,
                               const TransmitScheme& scheme, double c,
                               const PixelGrid& grid,
                               const BeamformParams& params = BeamformParams(),
                               double dynamic_range_db = 60.0);

}  // namespace usinv
