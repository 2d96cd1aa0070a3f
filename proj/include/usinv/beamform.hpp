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

#include <complex>
#include <vector>

#include <Eigen/Core>

#include "usinv/core.hpp"

namespace usinv {

/// Complex baseband samples, same cube shape as the source RF data.
struct IQCube {
  int n_tx = 0;
  int n_ft = 0;
  int n_ch = 0;
  std::vector<std::complex<double>> samples;  // row-major (tx, ft, ch)
  double carrier_frequency = 0.0;             // [Hz] used for demodulation
  double sampling_frequency = 0.0;            // [Hz]

  std::size_t flat(int tx, int ft, int ch) const {
    return (std::size_t(tx) * n_ft + ft) * n_ch + ch;
  }
  std::complex<double> at(int tx, int ft, int ch) const {
    return samples[flat(tx, ft, ch)];
  }
  std::complex<double>& at(int tx, int ft, int ch) {
    return samples[flat(tx, ft, ch)];
  }
};

/// Rectilinear image grid; values are pixel center coordinates in meters.
struct PixelGrid {
  int nx = 0;
  int nz = 0;
  double origin_x = 0.0;  // [m] center of pixel column 0
  double origin_z = 0.0;  // [m] center of pixel row 0
  double dx = 0.0;        // [m] > 0
  double dz = 0.0;        // [m] > 0

  double x(int ix) const { return origin_x + ix * dx; }
  double z(int iz) const { return origin_z + iz * dz; }
  /// Throws std::invalid_argument on nonpositive size or spacing.
  void validate() const;
};

enum class BeamformMethod { das, mv, dmas };

enum class RxWindow { rectangular, hann };

/**
 * Knobs of the pixel pipeline. The f-number accepts element `ch` for a
 * pixel p iff |x_ch - x_p| <= z_p / (2 f#); a nonpositive f-number accepts
 * every element (and forces a rectangular window, since an unbounded
 * aperture has no taper width). The lens delay is a constant two-way extra
 * delay added to every pixel's arrival time.
 */
struct BeamformParams {
  double f_number = 0.5;
  RxWindow window = RxWindow::rectangular;
  double lens_delay = 0.0;    // [s]
  int mv_subaperture = 30;    // L
  double mv_loading = 1e-4;   // delta, scaled by tr(R)/L
  bool mv_identity_hook = false;  // testing: skip estimation, use R = I
};

/// Earliest-arrival transmit delay at a point: min over the transmit's
/// firing elements of fire delay plus travel time. Throws
/// std::invalid_argument when no element fires.
double transmit_delay(const Eigen::Vector2d& point, int tx,
                      const TransducerGeometry& geometry, const TransmitScheme& scheme,
                      double c);

/**
 * Hilbert-transform IQ demodulation: analytic signal per trace, shifted to
 * baseband by exp(-i 2 pi f_c t) with t = ft / f_s, then low-pass filtered
 * with a zero-phase Butterworth response. `bandwidth` is the full two-sided
 * signal band in Hz; the baseband cutoff is half of it.
 * Requires f_s > 2 f_c.
 */
IQCube iq_demodulate(const RFDataCube& rf, double f_c, double f_s, int filter_order,
                     double bandwidth);

/**
 * TOF-corrected, phase-aligned, windowed receive aperture for one pixel of
 * one transmit. The transmit delay is the earliest firing-element arrival
 * (fire delay plus travel time); per channel the round-trip delay samples
 * the trace by linear interpolation and the sample is rotated by
 * exp(+i 2 pi f_c tau) to re-align the baseband phase. Channels outside
 * the f-number cone, or whose delay falls outside the recording, are
 * exactly zero.
 */
Eigen::VectorXcd tof_correct(const IQCube& iq, int tx, double pixel_x, double pixel_z,
                             const TransducerGeometry& geometry,
                             const TransmitScheme& scheme, double c,
                             const BeamformParams& params);

/// Plain coherent sum over the aperture.
std::complex<double> das(const Eigen::VectorXcd& u);

/**
 * Minimum-variance (Capon) value with spatial smoothing: the correlation
 * matrix is averaged over all length-L subapertures, diagonally loaded by
 * `loading`·tr(R)/L, and the distortionless weights w = R^-1 a / (a^H R^-1 a)
 * (a = ones) are applied to every subaperture. An all-zero aperture gives 0.
 * Throws std::invalid_argument for L outside [1, N] and std::runtime_error
 * ("ill-conditioned aperture") when the loaded matrix is still singular.
 * `identity_hook` replaces the estimated R with the identity (testing).
 */
std::complex<double> mv(const Eigen::VectorXcd& u, int subaperture, double loading,
                        bool identity_hook = false);

/// Delay-multiply-and-sum over all unordered channel pairs, each product
/// normalized to the geometric mean of the pair's magnitudes so the result
/// keeps the unit of u. Pairs with a zero factor contribute zero.
std::complex<double> dmas(const Eigen::VectorXcd& u);

/// Runs tof_correct plus the chosen beamformer for every pixel of every
/// transmit. Returns one nz-by-nx complex image per transmit.
std::vector<Eigen::MatrixXcd> beamform_image(const IQCube& iq, const PixelGrid& grid,
                                             const TransducerGeometry& geometry,
                                             const TransmitScheme& scheme, double c,
                                             BeamformMethod method,
                                             const BeamformParams& params);

/**
 * Mean over transmits (complex mean when `coherent`, mean of magnitudes
 * otherwise), then magnitude, 20 log10, peak-normalized to 0 dB and clamped
 * to [-dynamic_range_db, 0]. Throws std::invalid_argument on an empty list
 * and std::runtime_error ("empty image") when the compounded image is all
 * zero.
 */
Eigen::MatrixXd compound_and_compress(const std::vector<Eigen::MatrixXcd>& images,
                                      double dynamic_range_db, bool coherent = true);

/// Log compression of a nonnegative real image with the same convention:
/// 20 log10(v / peak) clamped to [-dynamic_range_db, 0].
Eigen::MatrixXd log_compress(const Eigen::MatrixXd& image, double dynamic_range_db);

}  // namespace usinv
