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

#include "usinv/red.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

#include "usinv/forward.hpp"
#include "usinv/parallel.hpp"

namespace usinv {

namespace {

/// Mirror an index into [0, n); valid for one reflection past each edge.
int reflect(int i, int n) {
  if (i < 0) i = -i - 1;
  if (i >= n) i = 2 * n - 1 - i;
  return std::min(std::max(i, 0), n - 1);
}

Eigen::MatrixXd to_image(const Eigen::VectorXd& x, const PixelGrid& grid) {
  Eigen::MatrixXd img(grid.nz, grid.nx);
  for (int iz = 0; iz < grid.nz; ++iz)
    for (int ix = 0; ix < grid.nx; ++ix) img(iz, ix) = x[iz * grid.nx + ix];
  return img;
}

Eigen::VectorXd to_vector(const Eigen::MatrixXd& img) {
  Eigen::VectorXd x(img.size());
  for (int iz = 0; iz < img.rows(); ++iz)
    for (int ix = 0; ix < img.cols(); ++ix) x[iz * img.cols() + ix] = img(iz, ix);
  return x;
}

/**
 * Conjugate gradient for an SPD operator. Returns the iterate once the
 * residual drops below tol·|b|; throws after the iteration cap.
 */
Eigen::VectorXd conjugate_gradient(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& op,
    const Eigen::VectorXd& b, Eigen::VectorXd x, int max_iterations, double tol) {
  const double b_norm = b.norm();
  if (b_norm == 0.0) return Eigen::VectorXd::Zero(b.size());

  Eigen::VectorXd r = b - op(x);
  Eigen::VectorXd p = r;
  double rho = r.squaredNorm();
  if (std::sqrt(rho) <= tol * b_norm) return x;

  for (int it = 0; it < max_iterations; ++it) {
    const Eigen::VectorXd ap = op(p);
    const double denom = p.dot(ap);
    if (!(denom > 0.0))
      throw std::runtime_error("red: conjugate gradient did not converge");
    const double alpha = rho / denom;
    x += alpha * p;
    r -= alpha * ap;
    const double rho_next = r.squaredNorm();
    if (std::sqrt(rho_next) <= tol * b_norm) return x;
    p = r + (rho_next / rho) * p;
    rho = rho_next;
  }
  throw std::runtime_error("red: conjugate gradient did not converge");
}

}  // namespace

Eigen::VectorXd SparseTofMatrix::apply(const Eigen::VectorXd& x) const {
  if (x.size() != cols) throw std::invalid_argument("red: phi width mismatch");
  Eigen::VectorXd y(rows);
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (std::int64_t i = 0; i < rows; ++i) {
    double acc = 0.0;
    for (std::int64_t k = row_ptr[std::size_t(i)]; k < row_ptr[std::size_t(i) + 1]; ++k)
      acc += values[std::size_t(k)] * x[col_idx[std::size_t(k)]];
    y[i] = acc;
  }
  return y;
}

Eigen::VectorXd SparseTofMatrix::apply_transpose(const Eigen::VectorXd& r) const {
  if (r.size() != rows) throw std::invalid_argument("red: phi height mismatch");
  Eigen::VectorXd y = Eigen::VectorXd::Zero(cols);
  for (std::int64_t i = 0; i < rows; ++i)
    for (std::int64_t k = row_ptr[std::size_t(i)]; k < row_ptr[std::size_t(i) + 1]; ++k)
      y[col_idx[std::size_t(k)]] += values[std::size_t(k)] * r[i];
  return y;
}

void RedConfig::validate() const {
  if (mu < 0.0) throw std::invalid_argument("red: mu must be nonnegative");
  if (!(beta > 0.0) || !(h > 0.0) || !(epsilon > 0.0))
    throw std::invalid_argument("red: beta, h, and epsilon must be positive");
  if (max_outer < 1 || cg_max_iterations < 1)
    throw std::invalid_argument("red: iteration caps must be at least 1");
  if (nlm_patch < 1 || nlm_patch % 2 == 0 || nlm_window < 1 || nlm_window % 2 == 0)
    throw std::invalid_argument("red: patch and window must be odd");
}

SparseTofMatrix build_phi(const PixelGrid& grid, const TransducerGeometry& geometry,
                          const TransmitScheme& scheme, double c, double f_s, int tx) {
  grid.validate();
  if (!(c > 0.0) || !(f_s > 0.0)) throw std::invalid_argument("red: c and f_s");
  if (tx < 0 || tx >= scheme.num_transmits())
    throw std::invalid_argument("red: transmit index");

  const int n_ch = int(geometry.num_channels());
  const int n_ft = scheme.n_fast_time;
  const std::int64_t n_pix = std::int64_t(grid.nx) * grid.nz;
  const double t_max = n_ft / f_s;

  SparseTofMatrix phi;
  phi.rows = std::int64_t(n_ft) * n_ch;
  phi.cols = n_pix;

  // Arrival times once per (pixel, channel); each pair touches at most the
  // two recording instants bracketing it.
  struct Entry {
    std::int64_t row;
    std::int32_t col;
    double value;
  };
  std::vector<Entry> entries;
  for (std::int64_t pix = 0; pix < n_pix; ++pix) {
    const int iz = int(pix / grid.nx);
    const int ix = int(pix % grid.nx);
    const Eigen::Vector2d p(grid.x(ix), grid.z(iz));
    const double tau_tx = transmit_delay(p, tx, geometry, scheme, c);
    for (int ch = 0; ch < n_ch; ++ch) {
      const double tau_pix =
          tau_tx + travel_time(geometry.element_positions.col(ch), p, c);
      const double ft_star = (tau_pix - scheme.initial_time) * f_s;
      const int ft0 = int(std::floor(ft_star));
      for (int ft = ft0; ft <= ft0 + 1; ++ft) {
        if (ft < 0 || ft >= n_ft) continue;
        const double tau_ax = scheme.initial_time + ft / f_s;
        const double mismatch = std::abs(tau_ax - tau_pix);
        if (!(mismatch < 1.0 / f_s)) continue;
        entries.push_back({std::int64_t(ft) * n_ch + ch, std::int32_t(pix),
                           mismatch / t_max});
      }
    }
  }

  // Counting sort by row; per-row column order follows pixel order, which
  // is already ascending.
  phi.row_ptr.assign(std::size_t(phi.rows) + 1, 0);
  for (const Entry& e : entries) ++phi.row_ptr[std::size_t(e.row) + 1];
  for (std::size_t i = 1; i < phi.row_ptr.size(); ++i)
    phi.row_ptr[i] += phi.row_ptr[i - 1];
  phi.col_idx.resize(entries.size());
  phi.values.resize(entries.size());
  std::vector<std::int64_t> cursor(phi.row_ptr.begin(), phi.row_ptr.end() - 1);
  for (const Entry& e : entries) {
    const std::int64_t k = cursor[std::size_t(e.row)]++;
    phi.col_idx[std::size_t(k)] = e.col;
    phi.values[std::size_t(k)] = e.value;
  }
  return phi;
}

Eigen::MatrixXd nlm_denoise(const Eigen::MatrixXd& image, double h, int patch,
                            int window) {
  if (!(h > 0.0)) throw std::invalid_argument("red: smoothing h must be positive");
  if (patch < 1 || patch % 2 == 0 || window < 1 || window % 2 == 0)
    throw std::invalid_argument("red: patch and window must be odd");

  const int nz = int(image.rows());
  const int nx = int(image.cols());
  const int pr = patch / 2;
  const int wr = window / 2;

  // Gaussian patch-offset weights, unit sum.
  Eigen::MatrixXd g(patch, patch);
  const double sigma = std::max(0.5, 0.5 * pr);
  for (int a = -pr; a <= pr; ++a)
    for (int b = -pr; b <= pr; ++b)
      g(a + pr, b + pr) = std::exp(-(a * a + b * b) / (2.0 * sigma * sigma));
  g /= g.sum();

  Eigen::MatrixXd out(nz, nx);
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (int iz = 0; iz < nz; ++iz) {
    for (int ix = 0; ix < nx; ++ix) {
      double acc = 0.0, norm = 0.0;
      for (int qz = iz - wr; qz <= iz + wr; ++qz) {
        for (int qx = ix - wr; qx <= ix + wr; ++qx) {
          if (qz < 0 || qz >= nz || qx < 0 || qx >= nx) continue;
          double dist = 0.0;
          for (int a = -pr; a <= pr; ++a)
            for (int b = -pr; b <= pr; ++b) {
              const double dp = image(reflect(iz + a, nz), reflect(ix + b, nx)) -
                                image(reflect(qz + a, nz), reflect(qx + b, nx));
              dist += g(a + pr, b + pr) * dp * dp;
            }
          const double w = std::exp(-dist / (h * h));
          acc += w * image(qz, qx);
          norm += w;
        }
      }
      out(iz, ix) = acc / norm;
    }
  }
  return out;
}

Eigen::VectorXd red_solve(const Eigen::VectorXd& y, const SparseTofMatrix& phi,
                          const PixelGrid& grid, const RedConfig& config) {
  config.validate();
  grid.validate();
  if (y.size() != phi.rows) throw std::invalid_argument("red: data length mismatch");
  if (std::int64_t(grid.nx) * grid.nz != phi.cols)
    throw std::invalid_argument("red: grid does not match phi");

  if (config.mu == 0.0) {
    // Plain least squares; CG on the normal equations from zero converges
    // to the minimum-norm solution.
    const auto normal = [&](const Eigen::VectorXd& v) {
      return phi.apply_transpose(phi.apply(v));
    };
    return conjugate_gradient(normal, phi.apply_transpose(y),
                              Eigen::VectorXd::Zero(phi.cols),
                              config.cg_max_iterations, config.cg_tolerance);
  }

  const auto regularized = [&](const Eigen::VectorXd& v) {
    return (2.0 * phi.apply_transpose(phi.apply(v)) + config.beta * v).eval();
  };
  const Eigen::VectorXd phi_t_y2 = 2.0 * phi.apply_transpose(y);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(phi.cols);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(phi.cols);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(phi.cols);

  for (int outer = 0; outer < config.max_outer; ++outer) {
    const Eigen::VectorXd x_prev = x;
    x = conjugate_gradient(regularized, phi_t_y2 + config.beta * (z - u), x,
                           config.cg_max_iterations, config.cg_tolerance);

    const Eigen::VectorXd fz = to_vector(
        nlm_denoise(to_image(z, grid), config.h, config.nlm_patch, config.nlm_window));
    z = (config.mu * fz + config.beta * (x + u)) / (config.mu + config.beta);
    u += x - z;

    if (!x.allFinite()) throw std::runtime_error("red: divergence");
    const double change = (x - x_prev).norm();
    if (outer > 0 && change <= config.epsilon * std::max(x_prev.norm(), 1e-300))
      break;
  }
  return x;
}

double red_objective(const Eigen::VectorXd& y, const SparseTofMatrix& phi,
                     const Eigen::VectorXd& x, const PixelGrid& grid,
                     const RedConfig& config) {
  const double fidelity = (y - phi.apply(x)).squaredNorm();
  if (config.mu == 0.0) return fidelity;
  const Eigen::VectorXd fx = to_vector(
      nlm_denoise(to_image(x, grid), config.h, config.nlm_patch, config.nlm_window));
  return fidelity + 0.5 * config.mu * x.dot(x - fx);
}

Eigen::MatrixXd red_compound(const std::vector<Eigen::MatrixXd>& images) {
  if (images.empty()) throw std::invalid_argument("red: nothing to compound");
  Eigen::MatrixXd acc = images[0];
  for (std::size_t k = 1; k < images.size(); ++k) {
    if (images[k].rows() != acc.rows() || images[k].cols() != acc.cols())
      throw std::invalid_argument("red: compound shape mismatch");
    acc += images[k];
  }
  return acc / double(images.size());
}

}  // namespace usinv
