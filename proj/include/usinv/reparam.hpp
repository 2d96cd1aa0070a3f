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

#include <utility>

#include <Eigen/Core>

#include "usinv/core.hpp"
#include "usinv/forward.hpp"

namespace usinv {

/**
 * Unconstrained optimization coordinates. Each physical parameter has one
 * xi; the maps in `constrain` keep the physical values inside their valid
 * ranges for any finite xi.
 */
struct FreeVariables {
  Eigen::VectorXd xi_amplitudes;   // length N_SC
  Eigen::Matrix2Xd xi_positions;   // 2 x N_SC
  double xi_elw = 0.0;
  double xi_c = 0.0;
  double xi_mu = 0.0;
  double xi_t0 = 0.0;
  Eigen::VectorXd xi_gamma;        // length N_CH
  double xi_lp_a = 0.0;
  double xi_lp_b = 0.0;

  Eigen::Index n_sc() const { return xi_amplitudes.size(); }
  Eigen::Index n_ch() const { return xi_gamma.size(); }

  static FreeVariables zero(Eigen::Index n_sc, Eigen::Index n_ch);

  /// Flat layout [amplitudes | positions x0 z0 x1 z1 ... | elw c mu t0 |
  /// gamma | lp_a lp_b], used by the optimizer state.
  Eigen::Index flat_size() const { return 3 * n_sc() + 4 + n_ch() + 2; }
  Eigen::VectorXd to_flat() const;
  static FreeVariables from_flat(const Eigen::VectorXd& flat, Eigen::Index n_sc,
                                 Eigen::Index n_ch);

  bool all_finite() const;
};

/// Gradients with respect to FreeVariables share its layout.
using GradientVector = FreeVariables;

/// Learning-rate groups over the flat layout.
enum class VarGroup { amplitude = 0, position = 1, physics = 2 };
constexpr int kVarGroups = 3;
VarGroup group_of(Eigen::Index flat_index, Eigen::Index n_sc, Eigen::Index n_ch);

/**
 * Constants of the xi <-> physical maps: exp for amplitudes, attenuation,
 * and the low-pass pair; scaled sigmoids for element width, element gain,
 * speed of sound, and time offset; a plain scale for positions.
 */
struct ReparamSpec {
  double element_width_nominal = 0.0;  // [m] sigmoid upper bound
  double speed_lo = 1400.0;            // [m/s]
  double speed_hi = 1600.0;            // [m/s]
  double time_offset_lo = 0.0;         // [s]
  double time_offset_hi = 0.0;         // [s]
  double position_scale = 0.0;         // [m] per unit xi
  double scatterer_radius = 1e-6;      // [m] fixed model constant

  /// Defaults tied to the probe: position scale of one nominal wavelength
  /// at the speed-range midpoint, time offset within +-2 carrier periods.
  static ReparamSpec from_geometry(const TransducerGeometry& geometry,
                                   double speed_lo = 1400.0, double speed_hi = 1600.0);

  void validate() const;
};

/// Maps xi to physical parameters. Never fails for finite xi.
std::pair<ScattererField, ModelParams> constrain(const FreeVariables& xi,
                                                 const ReparamSpec& spec);

/// Inverse of `constrain`. Throws std::invalid_argument ("not representable")
/// for values on or outside a sigmoid range or nonpositive exp-mapped values.
FreeVariables unconstrain(const ScattererField& field, const ModelParams& params,
                          const ReparamSpec& spec);

/// Chain rule: converts d(loss)/d(physical) at `xi` into d(loss)/d(xi).
GradientVector chain_gradient(const ModelGradient& phys, const FreeVariables& xi,
                              const ReparamSpec& spec);

}  // namespace usinv
