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

#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "usinv/core.hpp"
#include "usinv/forward.hpp"

namespace usinv {

/**
 * One feature of a synthetic scene. A cyst is a disk that scales the
 * amplitude of every background scatterer inside it by its echogenicity
 * (0 makes it anechoic); a wire adds a single bright scatterer at its
 * center with the given amplitude (radius and echogenicity unused).
 */
struct PhantomRegion {
  enum class Kind { cyst, wire };
  Kind kind = Kind::cyst;
  double center_x = 0.0;   // [m]
  double center_z = 0.0;   // [m]
  double radius = 0.0;     // [m] cyst disk radius
  double echogenicity = 1.0;
  double amplitude = 1.0;  // wire scatterer amplitude
};

/// Scene description: a speckle background of random scatterers at the
/// given density, shaped by regions applied in order (the last region
/// containing a scatterer wins).
struct PhantomSpec {
  double extent_x_lo = 0.0, extent_x_hi = 0.0;  // [m]
  double extent_z_lo = 0.0, extent_z_hi = 0.0;  // [m]
  double wavelength = 0.0;                      // [m] density reference
  double density_per_wavelength_sq = 3.0;       // scatterers per wavelength^2
  double amplitude_lo = 0.5, amplitude_hi = 1.0;
  std::vector<PhantomRegion> regions;

  void validate() const;
};

/**
 * Draws the scene: a Poisson-distributed number of background scatterers
 * uniform over the extent with uniform amplitudes, cyst scaling applied
 * last-region-wins, then one scatterer per wire. Overlapping cysts with
 * different echogenicity emit a warning into `warnings` (or stderr when
 * null). Throws std::invalid_argument when a region leaves the extent.
 */
ScattererField gen_phantom(const PhantomSpec& spec, std::mt19937_64& rng,
                           std::vector<std::string>* warnings = nullptr);

/**
 * Forward-simulates the full RF cube for the field under the given physics
 * and model kind, then adds white Gaussian noise of standard deviation
 * `noise_std`, amplified by the same per-depth gain curve the model applies
 * to the signal. The returned cube carries `tgc` as its gain curve.
 */
RFDataCube simulate_rf(const ScattererField& field, const ModelParams& params,
                       const TransducerGeometry& geometry, const TransmitScheme& scheme,
                       const Eigen::VectorXd& tgc, double noise_std,
                       std::mt19937_64& rng, ModelKind kind = ModelKind::wavefront,
                       const FeatureToggles& toggles = FeatureToggles());

}  // namespace usinv
