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

#include "usinv/core.hpp"

#include <cmath>
#include <sstream>

namespace usinv {

RFDataCube RFDataCube::zeros(int n_tx, int n_ft, int n_ch) {
  RFDataCube cube;
  cube.n_tx = n_tx;
  cube.n_ft = n_ft;
  cube.n_ch = n_ch;
  cube.samples.assign(std::size_t(n_tx) * n_ft * n_ch, 0.0f);
  cube.tgc_curve = Eigen::VectorXd::Ones(n_ft);
  return cube;
}

namespace {

bool all_finite(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  return m.allFinite();
}

std::string fmt(const char* text, Eigen::Index i) {
  std::ostringstream os;
  os << text << " (index " << i << ")";
  return os.str();
}

}  // namespace

std::vector<std::string> validate_acquisition(const TransducerGeometry& geometry,
                                              const TransmitScheme& scheme,
                                              const RFDataCube& data) {
  std::vector<std::string> report;
  auto add = [&report](const std::string& msg) { report.push_back(msg); };

  const Eigen::Index n_ch = geometry.num_channels();
  const Eigen::Index n_tx = scheme.num_transmits();

  // Geometry.
  if (n_ch < 1) add("geometry has no elements");
  if (geometry.element_positions.rows() != 2)
    add("element positions must have two coordinate rows");
  if (!all_finite(geometry.element_positions))
    add("element positions contain non-finite values");
  for (Eigen::Index c = 0; c < geometry.element_positions.cols(); ++c) {
    if (geometry.element_positions(1, c) != 0.0) {
      add(fmt("element not on the z=0 aperture line", c));
      break;
    }
  }
  if (!(geometry.element_width_nominal > 0.0))
    add("nominal element width must be positive");
  if (!(geometry.center_frequency > 0.0))
    add("center frequency must be positive");
  if (!(geometry.sampling_frequency > 2.0 * geometry.center_frequency))
    add("sampling frequency must exceed twice the center frequency");

  // Transmit scheme.
  if (n_tx < 1) add("scheme has no transmits");
  if (scheme.delays.cols() != n_ch)
    add("delay matrix channel count does not match geometry");
  if (scheme.apodization.rows() != n_tx || scheme.apodization.cols() != scheme.delays.cols())
    add("apodization shape does not match delay matrix");
  if (!all_finite(scheme.delays) || (scheme.delays.size() > 0 && scheme.delays.minCoeff() < 0.0))
    add("delays must be finite and nonnegative");
  else
    for (Eigen::Index t = 0; t < n_tx; ++t)
      if (scheme.delays.cols() > 0 && scheme.delays.row(t).minCoeff() != 0.0) {
        add(fmt("delays not zero-anchored within transmit", t));
        break;
      }
  if (!all_finite(scheme.apodization) ||
      (scheme.apodization.size() > 0 && scheme.apodization.minCoeff() < 0.0))
    add("apodization must be finite and nonnegative");
  else
    for (Eigen::Index t = 0; t < scheme.apodization.rows(); ++t)
      if (scheme.apodization.cols() > 0 && scheme.apodization.row(t).maxCoeff() <= 0.0) {
        add(fmt("transmit has no firing element", t));
        break;
      }
  if (Eigen::Index(scheme.waveforms.size()) != n_tx)
    add("waveform count does not match transmit count");
  for (std::size_t w = 0; w < scheme.waveforms.size(); ++w) {
    const Waveform& wf = scheme.waveforms[w];
    if (wf.samples.size() < 2 || !(wf.sample_rate > 0.0) ||
        !wf.samples.allFinite() || !std::isfinite(wf.start_time)) {
      add(fmt("waveform is degenerate", Eigen::Index(w)));
      break;
    }
  }
  if (scheme.n_fast_time < 1) add("fast-time window is empty");
  if (!std::isfinite(scheme.initial_time)) add("initial time is not finite");

  // Data cube.
  if (data.n_tx != int(n_tx) || data.n_ch != int(n_ch) || data.n_ft != scheme.n_fast_time)
    add("data cube shape does not match geometry and scheme");
  if (data.samples.size() != data.total_samples())
    add("data cube sample storage has the wrong length");
  if (data.tgc_curve.size() != data.n_ft)
    add("gain curve length does not match fast-time window");
  else if (data.tgc_curve.size() > 0 &&
           (!data.tgc_curve.allFinite() || data.tgc_curve.minCoeff() <= 0.0))
    add("gain curve must be finite and strictly positive");
  for (float s : data.samples)
    if (!std::isfinite(s)) {
      add("data cube contains non-finite samples");
      break;
    }

  return report;
}

}  // namespace usinv
