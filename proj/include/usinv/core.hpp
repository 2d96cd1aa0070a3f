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

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace usinv {

/**
 * Sampled transmit pulse, stored already two-way band-pass filtered.
 *
 * `start_time` places the first sample on the continuous time axis; a
 * zero-phase pulse has start_time = -duration/2 so its envelope peak sits
 * at t = 0. The pulse may be sampled at a different (usually higher) rate
 * than the RF data; evaluation between samples is by linear interpolation.
 */
struct Waveform {
  Eigen::VectorXd samples;
  double sample_rate = 0.0;  // [Hz]
  double start_time = 0.0;   // [s]

  double duration() const {
    return samples.size() > 1 ? double(samples.size() - 1) / sample_rate : 0.0;
  }
  double end_time() const { return start_time + duration(); }
};

/// Linear transducer lying on the x-axis, emitting surface facing +z.
struct TransducerGeometry {
  Eigen::Matrix2Xd element_positions;  // [m], row 0 = x, row 1 = z (must be 0)
  double element_width_nominal = 0.0;  // [m]
  double center_frequency = 0.0;       // [Hz]
  double sampling_frequency = 0.0;     // [Hz]

  Eigen::Index num_channels() const { return element_positions.cols(); }
  /// Nominal wavelength at a given speed of sound.
  double wavelength(double speed_of_sound) const {
    return speed_of_sound / center_frequency;
  }
};

/**
 * One acquisition's transmit configuration: per-transmit element fire
 * delays (zero-anchored per transmit), per-element transmit gains (zero
 * marks a non-firing element), the emitted pulse per transmit, and the
 * fast-time recording window.
 */
struct TransmitScheme {
  Eigen::MatrixXd delays;          // [s], n_tx x n_ch
  Eigen::MatrixXd apodization;     // unitless >= 0, n_tx x n_ch
  std::vector<Waveform> waveforms; // one per transmit
  double initial_time = 0.0;       // [s] wait between t=0 and first sample
  int n_fast_time = 0;

  Eigen::Index num_transmits() const { return delays.rows(); }
};

/// Off-grid scatterer cloud: continuous positions plus nonnegative amplitudes.
struct ScattererField {
  Eigen::Matrix2Xd positions;  // [m]
  Eigen::VectorXd amplitudes;  // unitless >= 0

  Eigen::Index size() const { return positions.cols(); }
};

/// Free physics parameters of the measurement model.
struct ModelParams {
  double speed_of_sound = 1540.0;    // [m/s]
  double attenuation_coeff = 0.5;    // [dB/cm/MHz]
  double element_width = 0.0;        // [m] effective width, <= nominal
  Eigen::VectorXd element_gain;      // per channel, in [0.5, 1]
  double initial_time_offset = 0.0;  // [s] additive correction to initial_time
  double lowpass_intercept = 1.0;    // normalized cutoff at zero travel time
  double lowpass_slope = 0.0;        // [1/s] cutoff change per travel second
  double scatterer_radius = 1e-6;    // [m] fixed, well below a wavelength
};

/// Recorded (or simulated) RF data plus the gain curve it was amplified with.
struct RFDataCube {
  int n_tx = 0;
  int n_ft = 0;
  int n_ch = 0;
  std::vector<float> samples;  // row-major (tx, ft, ch), ADC units
  Eigen::VectorXd tgc_curve;   // per fast-time gain, > 0 everywhere

  std::size_t flat(int tx, int ft, int ch) const {
    return (std::size_t(tx) * n_ft + ft) * n_ch + ch;
  }
  float at(int tx, int ft, int ch) const { return samples[flat(tx, ft, ch)]; }
  float& at(int tx, int ft, int ch) { return samples[flat(tx, ft, ch)]; }
  std::size_t total_samples() const {
    return std::size_t(n_tx) * n_ft * n_ch;
  }

  /// Cube of zeros with a unit TGC curve.
  static RFDataCube zeros(int n_tx, int n_ft, int n_ch);
};

/**
 * Checks shape and range invariants across an acquisition.
 * Returns one message per violated invariant; empty means consistent.
 * Pure: never throws, never modifies inputs.
 */
std::vector<std::string> validate_acquisition(const TransducerGeometry& geometry,
                                              const TransmitScheme& scheme,
                                              const RFDataCube& data);

}  // namespace usinv
