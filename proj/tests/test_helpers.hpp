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

#include <cmath>

#include "usinv/core.hpp"

namespace usinv::testutil {

/// Gaussian-modulated cosine pulse, zero phase (envelope peak at t = 0).
/// `frac_bw` is the -6 dB fractional bandwidth of the Gaussian envelope.
inline Waveform make_pulse(double fc, double frac_bw = 0.6, double rate_factor = 16.0) {
  Waveform wf;
  wf.sample_rate = rate_factor * fc;
  const double sigma_f = frac_bw * fc / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  const double sigma_t = 1.0 / (2.0 * M_PI * sigma_f);
  const double half = 3.5 * sigma_t;
  const int n = 2 * int(std::ceil(half * wf.sample_rate)) + 1;
  wf.start_time = -0.5 * double(n - 1) / wf.sample_rate;
  wf.samples.resize(n);
  for (int i = 0; i < n; ++i) {
    const double t = wf.start_time + double(i) / wf.sample_rate;
    wf.samples[i] = std::cos(2.0 * M_PI * fc * t) * std::exp(-0.5 * t * t / (sigma_t * sigma_t));
  }
  return wf;
}

inline TransducerGeometry make_geometry(int n_ch, double fc = 5e6, double fs = 20e6,
                                        double pitch = 3e-4) {
  TransducerGeometry g;
  g.element_positions.resize(2, n_ch);
  for (int c = 0; c < n_ch; ++c) {
    g.element_positions(0, c) = (c - 0.5 * (n_ch - 1)) * pitch;
    g.element_positions(1, c) = 0.0;
  }
  g.element_width_nominal = 0.9 * pitch;
  g.center_frequency = fc;
  g.sampling_frequency = fs;
  return g;
}

/// Plane-wave scheme with angles spread evenly in [-max_angle, max_angle].
inline TransmitScheme make_plane_scheme(const TransducerGeometry& g, int n_tx, int n_ft,
                                        double max_angle_deg = 10.0, double c = 1540.0) {
  TransmitScheme s;
  const int n_ch = int(g.num_channels());
  s.delays.resize(n_tx, n_ch);
  s.apodization = Eigen::MatrixXd::Ones(n_tx, n_ch);
  for (int t = 0; t < n_tx; ++t) {
    const double angle = n_tx > 1
        ? (-max_angle_deg + 2.0 * max_angle_deg * t / (n_tx - 1)) * M_PI / 180.0
        : 0.0;
    for (int e = 0; e < n_ch; ++e)
      s.delays(t, e) = g.element_positions(0, e) * std::sin(angle) / c;
    s.delays.row(t).array() -= s.delays.row(t).minCoeff();
  }
  s.waveforms.assign(std::size_t(n_tx), make_pulse(g.center_frequency));
  s.initial_time = 2e-6;
  s.n_fast_time = n_ft;
  return s;
}

}  // namespace usinv::testutil
