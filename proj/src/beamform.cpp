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

#include "usinv/beamform.hpp"

#include <cmath>
#include <exception>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

#include "usinv/forward.hpp"
#include "usinv/parallel.hpp"
#include "usinv/signal.hpp"

namespace usinv {

namespace {

constexpr std::complex<double> kI{0.0, 1.0};

}  // namespace

double transmit_delay(const Eigen::Vector2d& point, int tx,
                      const TransducerGeometry& geometry, const TransmitScheme& scheme,
                      double c) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index e = 0; e < geometry.num_channels(); ++e) {
    if (scheme.apodization(tx, e) == 0.0) continue;
    const double t =
        scheme.delays(tx, e) + travel_time(geometry.element_positions.col(e), point, c);
    if (t < best) best = t;
  }
  if (!std::isfinite(best))
    throw std::invalid_argument("beamform: transmit has no firing element");
  return best;
}

void PixelGrid::validate() const {
  if (nx < 1 || nz < 1) throw std::invalid_argument("grid: empty pixel grid");
  if (!(dx > 0.0) || !(dz > 0.0))
    throw std::invalid_argument("grid: pixel spacing must be positive");
}

IQCube iq_demodulate(const RFDataCube& rf, double f_c, double f_s, int filter_order,
                     double bandwidth) {
  if (!(f_s > 2.0 * f_c))
    throw std::invalid_argument("beamform: sampling rate below Nyquist for carrier");
  if (filter_order < 1 || !(bandwidth > 0.0))
    throw std::invalid_argument("beamform: bad demodulation filter");

  IQCube iq;
  iq.n_tx = rf.n_tx;
  iq.n_ft = rf.n_ft;
  iq.n_ch = rf.n_ch;
  iq.carrier_frequency = f_c;
  iq.sampling_frequency = f_s;
  iq.samples.assign(rf.total_samples(), {0.0, 0.0});

  Eigen::VectorXd trace(rf.n_ft);
  Eigen::VectorXcd carrier(rf.n_ft);
  for (int ft = 0; ft < rf.n_ft; ++ft)
    carrier[ft] = std::exp(-kI * (2.0 * std::numbers::pi * f_c * ft / f_s));

  for (int tx = 0; tx < rf.n_tx; ++tx) {
    for (int ch = 0; ch < rf.n_ch; ++ch) {
      for (int ft = 0; ft < rf.n_ft; ++ft) trace[ft] = double(rf.at(tx, ft, ch));
      Eigen::VectorXcd baseband = analytic_signal(trace).cwiseProduct(carrier);
      baseband = butterworth_lowpass(baseband, f_s, 0.5 * bandwidth, filter_order);
      for (int ft = 0; ft < rf.n_ft; ++ft) iq.at(tx, ft, ch) = baseband[ft];
    }
  }
  return iq;
}

Eigen::VectorXcd tof_correct(const IQCube& iq, int tx, double pixel_x, double pixel_z,
                             const TransducerGeometry& geometry,
                             const TransmitScheme& scheme, double c,
                             const BeamformParams& params) {
  if (tx < 0 || tx >= iq.n_tx) throw std::invalid_argument("beamform: transmit index");
  const Eigen::Vector2d pixel(pixel_x, pixel_z);
  const double tau_tx = transmit_delay(pixel, tx, geometry, scheme, c);

  Eigen::VectorXcd u = Eigen::VectorXcd::Zero(iq.n_ch);
  for (int ch = 0; ch < iq.n_ch; ++ch) {
    double weight = 1.0;
    if (params.f_number > 0.0) {
      const double half_width = pixel_z / (2.0 * params.f_number);
      const double off = geometry.element_positions(0, ch) - pixel_x;
      if (std::abs(off) > half_width) continue;
      if (params.window == RxWindow::hann)
        weight = 0.5 * (1.0 + std::cos(std::numbers::pi * off / half_width));
    }

    const double tau = tau_tx +
                       travel_time(geometry.element_positions.col(ch), pixel, c) +
                       params.lens_delay;
    const double s = (tau - scheme.initial_time) * iq.sampling_frequency;
    const double i0f = std::floor(s);
    const int i0 = int(i0f);
    if (i0 < 0 || i0 + 1 >= iq.n_ft) continue;
    const double frac = s - i0f;
    const std::complex<double> val =
        (1.0 - frac) * iq.at(tx, i0, ch) + frac * iq.at(tx, i0 + 1, ch);
    u[ch] = weight * val *
            std::exp(kI * (2.0 * std::numbers::pi * iq.carrier_frequency * tau));
  }
  return u;
}

std::complex<double> das(const Eigen::VectorXcd& u) { return u.sum(); }

std::complex<double> mv(const Eigen::VectorXcd& u, int subaperture, double loading,
                        bool identity_hook) {
  const int n = int(u.size());
  const int L = subaperture;
  if (L < 1 || L > n) throw std::invalid_argument("beamform: subaperture length");
  if (u.isZero(0.0)) return {0.0, 0.0};

  const int n_sub = n - L + 1;
  Eigen::MatrixXcd R;
  if (identity_hook) {
    R = Eigen::MatrixXcd::Identity(L, L);
  } else {
    R = Eigen::MatrixXcd::Zero(L, L);
    for (int l = 0; l < n_sub; ++l) {
      const Eigen::VectorXcd seg = u.segment(l, L);
      R.noalias() += seg * seg.adjoint();
    }
    R /= double(n_sub);
    R += (loading * R.trace().real() / L) * Eigen::MatrixXcd::Identity(L, L);
  }

  const Eigen::VectorXcd a = Eigen::VectorXcd::Ones(L);
  const Eigen::VectorXcd w0 = Eigen::LDLT<Eigen::MatrixXcd>(R).solve(a);
  const std::complex<double> denom = w0.sum();  // a^H R^-1 a
  if (!w0.allFinite() || !((R * w0 - a).norm() <= 1e-8 * a.norm()) ||
      std::abs(denom) == 0.0)
    throw std::runtime_error("ill-conditioned aperture");
  const Eigen::VectorXcd w = w0 / denom;

  std::complex<double> z{0.0, 0.0};
  for (int l = 0; l < n_sub; ++l) z += w.dot(u.segment(l, L));  // w^H u_l
  return z / double(n_sub);
}

std::complex<double> dmas(const Eigen::VectorXcd& u) {
  const int n = int(u.size());
  std::complex<double> z{0.0, 0.0};
  for (int i = 0; i < n; ++i) {
    const double mi = std::abs(u[i]);
    if (mi == 0.0) continue;
    for (int j = i + 1; j < n; ++j) {
      const double mj = std::abs(u[j]);
      if (mj == 0.0) continue;
      z += u[i] * u[j] / (std::sqrt(mi) * std::sqrt(mj));
    }
  }
  return z;
}

std::vector<Eigen::MatrixXcd> beamform_image(const IQCube& iq, const PixelGrid& grid,
                                             const TransducerGeometry& geometry,
                                             const TransmitScheme& scheme, double c,
                                             BeamformMethod method,
                                             const BeamformParams& params) {
  grid.validate();
  if (!(c > 0.0)) throw std::invalid_argument("beamform: speed of sound");

  std::vector<Eigen::MatrixXcd> images(std::size_t(iq.n_tx));
  std::exception_ptr failure;
  for (int tx = 0; tx < iq.n_tx; ++tx) {
    Eigen::MatrixXcd& img = images[std::size_t(tx)];
    img.setZero(grid.nz, grid.nx);
#pragma omp parallel for schedule(static) num_threads(thread_count())
    for (int iz = 0; iz < grid.nz; ++iz) {
      try {
        for (int ix = 0; ix < grid.nx; ++ix) {
          const Eigen::VectorXcd u =
              tof_correct(iq, tx, grid.x(ix), grid.z(iz), geometry, scheme, c, params);
          switch (method) {
            case BeamformMethod::das:
              img(iz, ix) = das(u);
              break;
            case BeamformMethod::mv:
              img(iz, ix) = mv(u, params.mv_subaperture, params.mv_loading,
                               params.mv_identity_hook);
              break;
            case BeamformMethod::dmas:
              img(iz, ix) = dmas(u);
              break;
          }
        }
      } catch (...) {
#pragma omp critical
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  }
  return images;
}

Eigen::MatrixXd compound_and_compress(const std::vector<Eigen::MatrixXcd>& images,
                                      double dynamic_range_db, bool coherent) {
  if (images.empty()) throw std::invalid_argument("beamform: no images to compound");
  for (const auto& img : images)
    if (img.rows() != images[0].rows() || img.cols() != images[0].cols())
      throw std::invalid_argument("beamform: compound shape mismatch");

  Eigen::MatrixXd magnitude;
  if (coherent) {
    Eigen::MatrixXcd acc = images[0];
    for (std::size_t k = 1; k < images.size(); ++k) acc += images[k];
    magnitude = (acc / double(images.size())).cwiseAbs();
  } else {
    magnitude = images[0].cwiseAbs();
    for (std::size_t k = 1; k < images.size(); ++k) magnitude += images[k].cwiseAbs();
    magnitude /= double(images.size());
  }
  return log_compress(magnitude, dynamic_range_db);
}

Eigen::MatrixXd log_compress(const Eigen::MatrixXd& image, double dynamic_range_db) {
  if (!(dynamic_range_db > 0.0))
    throw std::invalid_argument("beamform: dynamic range must be positive");
  const Eigen::MatrixXd magnitude = image.cwiseAbs();
  const double peak = magnitude.maxCoeff();
  if (!(peak > 0.0)) throw std::runtime_error("empty image");

  Eigen::MatrixXd db(magnitude.rows(), magnitude.cols());
  for (Eigen::Index i = 0; i < magnitude.rows(); ++i)
    for (Eigen::Index j = 0; j < magnitude.cols(); ++j) {
      const double v = 20.0 * std::log10(magnitude(i, j) / peak);
      db(i, j) = std::min(0.0, std::max(-dynamic_range_db, v));
    }
  return db;
}

}  // namespace usinv
