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

#include <doctest.h>

#include <limits>

#include "usinv/core.hpp"
#include "test_helpers.hpp"

using namespace usinv;

namespace {

bool mentions(const std::vector<std::string>& report, const std::string& needle) {
  for (const std::string& msg : report)
    if (msg.find(needle) != std::string::npos) return true;
  return false;
}

struct Scene {
  TransducerGeometry geometry;
  TransmitScheme scheme;
  RFDataCube data;
};

Scene make_scene() {
  Scene s;
  s.geometry = testutil::make_geometry(8);
  s.scheme = testutil::make_plane_scheme(s.geometry, 3, 64);
  s.data = RFDataCube::zeros(3, 64, 8);
  return s;
}

}  // namespace

TEST_CASE("consistent acquisition validates cleanly") {
  Scene s = make_scene();
  CHECK(validate_acquisition(s.geometry, s.scheme, s.data).empty());
}

TEST_CASE("geometry violations are reported") {
  Scene s = make_scene();
  s.geometry.element_positions(1, 3) = 1e-4;
  CHECK(mentions(validate_acquisition(s.geometry, s.scheme, s.data), "aperture line"));

  s = make_scene();
  s.geometry.element_width_nominal = 0.0;
  CHECK(mentions(validate_acquisition(s.geometry, s.scheme, s.data), "element width"));

  s = make_scene();
  s.geometry.sampling_frequency = 1.5 * s.geometry.center_frequency;
  CHECK(mentions(validate_acquisition(s.geometry, s.scheme, s.data), "twice the center"));
}

TEST_CASE("scheme violations are reported") {
  Scene s = make_scene();
  s.scheme.delays.row(1).array() += 1e-7;
  CHECK(mentions(validate_acquisition(s.geometry, s.scheme, s.data), "zero-anchored"));

  s = make_scene();
  s.scheme.apodization(0, 2) = -0.5;
  CHECK(mentions(validate_acquisition(s.geometry, s.scheme, s.data), "apodization"));

  s = make_scene();
  s.scheme.apodization.row(2).setZero();
  CHECK(mentions(validate_acquisition(s.geometry, s.scheme, s.data), "no firing element"));

  s = make_scene();
  s.scheme.waveforms.pop_back();
  CHECK(mentions(validate_acquisition(s.geometry, s.scheme, s.data), "waveform count"));

  s = make_scene();
  s.scheme.waveforms[0].sample_rate = 0.0;
  CHECK(mentions(validate_acquisition(s.geometry, s.scheme, s.data), "degenerate"));
}

TEST_CASE("data cube violations are reported") {
  Scene s = make_scene();
  s.data.tgc_curve[5] = 0.0;
  CHECK(mentions(validate_acquisition(s.geometry, s.scheme, s.data), "gain curve"));

  s = make_scene();
  s.data.n_ft = 63;
  s.data.samples.resize(s.data.total_samples());
  s.data.tgc_curve = Eigen::VectorXd::Ones(63);
  CHECK(mentions(validate_acquisition(s.geometry, s.scheme, s.data), "shape"));

  s = make_scene();
  s.data.at(1, 10, 4) = std::numeric_limits<float>::quiet_NaN();
  CHECK(mentions(validate_acquisition(s.geometry, s.scheme, s.data), "non-finite"));
}

TEST_CASE("cube indexing is row major in (tx, ft, ch)") {
  RFDataCube cube = RFDataCube::zeros(2, 3, 4);
  cube.at(1, 2, 3) = 7.0f;
  CHECK(cube.samples.back() == 7.0f);
  CHECK(cube.flat(0, 0, 1) == 1);
  CHECK(cube.flat(0, 1, 0) == 4);
  CHECK(cube.flat(1, 0, 0) == 12);
}

TEST_CASE("zero-phase pulse peaks at t = 0") {
  const Waveform wf = testutil::make_pulse(5e6);
  CHECK(wf.start_time == doctest::Approx(-wf.end_time()));
  Eigen::Index peak = 0;
  wf.samples.cwiseAbs().maxCoeff(&peak);
  const double t_peak = wf.start_time + double(peak) / wf.sample_rate;
  CHECK(std::abs(t_peak) < 1.0 / wf.sample_rate);
}
