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
#include <random>
#include <string>
#include <vector>

#include "usinv/grad.hpp"

namespace usinv {

/**
 * Everything a solve run needs beyond the data itself. Learning rates are
 * per variable group; the warm-up delay keeps physics parameters fixed
 * while the scatterer amplitudes settle. A nonpositive init_amplitude
 * requests automatic scaling so the initial prediction RMS is about 10%
 * of the data RMS.
 */
struct SolverConfig {
  int grid_nx = 64;
  int grid_nz = 64;
  double extent_x_lo = 0.0, extent_x_hi = 0.0;  // [m]
  double extent_z_lo = 0.0, extent_z_hi = 0.0;  // [m]

  int batch_size = 4096;
  int iterations = 30000;
  double lr_amplitude = 1e-2;
  double lr_position = 1e-2;
  double lr_physics = 1e-3;
  double beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8;
  std::uint64_t seed = 0;
  ModelKind model_kind = ModelKind::wavefront;
  FeatureToggles toggles;

  int warmup_iterations = 500;
  bool freeze_amplitudes = false;
  bool freeze_positions = false;
  bool freeze_physics = false;

  // Position box; NaN entries are derived from the extent (padded by two
  // nominal wavelengths, depth floored at 1 mm) when the solve starts.
  double box_x_lo = NAN, box_x_hi = NAN, box_z_lo = NAN, box_z_hi = NAN;

  double speed_lo = 1400.0, speed_hi = 1600.0;  // [m/s] sigmoid bounds

  // Initial guesses; init_speed < 0 picks the speed-range midpoint.
  double init_amplitude = 0.0;
  double init_speed = -1.0;
  double init_attenuation = 0.5;      // [dB/cm/MHz]
  double init_elw_fraction = 0.5;     // of the nominal element width
  double init_element_gain = 0.75;
  double init_time_offset = 0.0;      // [s]
  double init_lowpass_intercept = 1.0;
  double init_lowpass_slope = 1e-3;   // [1/s]

  int holdout_interval = 100;
  int holdout_size = 0;               // 0 means use batch_size
  int checkpoint_interval = 0;        // 0 disables checkpoints
  std::string checkpoint_path;

  void validate() const;
};

/// Outcome of a solve: final coordinates, their physical image, and the
/// loss history (per iteration, plus the held-out batch every interval).
struct Solution {
  FreeVariables xi;
  ScattererField field;
  ModelParams params;
  Eigen::VectorXd loss_trace;
  Eigen::VectorXd holdout_trace;
  double wall_seconds = 0.0;
};

/// The reparameterization constants a solve with this config uses.
ReparamSpec make_reparam_spec(const SolverConfig& config, const TransducerGeometry& geometry);

/**
 * Regular grid of scatterers over the configured extent (cell centers of a
 * grid_nx by grid_nz partition), amplitudes at the configured constant,
 * physics parameters at their initial guesses. Throws std::invalid_argument
 * when the extent leaves the position box.
 */
FreeVariables init_grid(const SolverConfig& config, const TransducerGeometry& geometry);

/// Uniform sample of `batch_size` distinct cube indices, insertion-ordered;
/// O(batch_size) memory regardless of cube size.
std::vector<SampleIndex> sample_batch(std::mt19937_64& rng, int n_tx, int n_ft, int n_ch,
                                      int batch_size);

/// Adam state over the flat variable layout. Each learning-rate group keeps
/// its own step count so frozen phases do not distort bias correction.
struct AdamState {
  Eigen::VectorXd m, v;
  std::int64_t step[kVarGroups] = {0, 0, 0};

  static AdamState zero(Eigen::Index flat_size);
};

/**
 * One Adam update in place. `active` enables each variable group; inactive
 * groups keep their state and value untouched. Throws std::runtime_error
 * ("divergence detected") on non-finite gradients.
 */
void adam_step(AdamState& state, Eigen::VectorXd& flat, const Eigen::VectorXd& grad_flat,
               const SolverConfig& config, const bool active[kVarGroups],
               Eigen::Index n_sc, Eigen::Index n_ch);

/// Full stochastic solve loop; deterministic for fixed config, seed, data,
/// and worker count.
Solution solve(const RFDataCube& observed, const TransducerGeometry& geometry,
               const TransmitScheme& scheme, const SolverConfig& config);

void write_solution_file(const std::string& path, const Solution& solution,
                         const ReparamSpec& spec);
/// Reads back a solution plus the spec it was produced under.
Solution read_solution_file(const std::string& path, ReparamSpec* spec_out = nullptr);

}  // namespace usinv
