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
#include <vector>

#include <Eigen/Core>

#include "usinv/beamform.hpp"
#include "usinv/core.hpp"

namespace usinv {

/**
 * Sparse time-of-flight system matrix for one transmit, mapping a flattened
 * pixel image (column iz*nx+ix) to flattened RF samples (row ft*n_ch+ch).
 * An entry exists wherever the pixel's round-trip arrival lies within one
 * sample period of the recording instant; its value is the normalized
 * mismatch |tau_ax - tau_pix| / t_max in [0, 1). Entries that happen to be
 * exactly zero are kept: the sparsity pattern is the arrival window, not
 * the value.
 */
struct SparseTofMatrix {
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  std::vector<std::int64_t> row_ptr;  // size rows+1
  std::vector<std::int32_t> col_idx;  // ascending within each row
  std::vector<double> values;

  std::int64_t nnz() const { return std::int64_t(col_idx.size()); }
  /// y = Phi x.
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  /// Phi^T r.
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& r) const;
};

/// Knobs of the regularized solve; defaults follow the reference settings.
struct RedConfig {
  double mu = 2000.0;      // regularization weight; 0 disables the denoiser
  double beta = 1000.0;    // ADMM penalty
  double epsilon = 5e-4;   // relative-change stopping threshold
  double h = 0.8;          // denoiser smoothing
  int max_outer = 30;
  int nlm_patch = 5;       // odd
  int nlm_window = 11;     // odd
  int cg_max_iterations = 500;
  double cg_tolerance = 1e-10;

  void validate() const;
};

/**
 * Builds the sparse TOF matrix for one transmit over the pixel grid. The
 * pixel arrival uses the same earliest-firing-element transmit delay model
 * as tof_correct; the recording instant of row ft is the initial time plus
 * ft / f_s, and t_max is the recording duration n_fast_time / f_s.
 */
SparseTofMatrix build_phi(const PixelGrid& grid, const TransducerGeometry& geometry,
                          const TransmitScheme& scheme, double c, double f_s, int tx);

/**
 * Non-local means with Gaussian-weighted patch distances: each pixel is
 * replaced by the similarity-weighted mean over its search window, with
 * patch reads reflected at the borders. `patch` and `window` are odd edge
 * lengths; `h` is the smoothing scale of the exponential weights.
 */
Eigen::MatrixXd nlm_denoise(const Eigen::MatrixXd& image, double h, int patch,
                            int window);

/**
 * Solves min_x ||y - Phi x||^2 + (mu/2) x^T (x - F(x)) with F the non-local
 * means denoiser, by ADMM: conjugate-gradient x-update, one denoiser
 * fixed-point step per z-update, standard dual ascent; stops when the
 * relative change of x falls below epsilon. mu = 0 reduces to conjugate
 * gradient on the normal equations from zero, i.e. the minimum-norm least
 * squares solution. Throws std::runtime_error when CG fails to converge.
 */
Eigen::VectorXd red_solve(const Eigen::VectorXd& y, const SparseTofMatrix& phi,
                          const PixelGrid& grid, const RedConfig& config);

/// The objective value the solve minimizes, for a candidate x.
double red_objective(const Eigen::VectorXd& y, const SparseTofMatrix& phi,
                     const Eigen::VectorXd& x, const PixelGrid& grid,
                     const RedConfig& config);

/// Pixelwise mean over per-transmit solutions.
Eigen::MatrixXd red_compound(const std::vector<Eigen::MatrixXd>& images);

}  // namespace usinv
