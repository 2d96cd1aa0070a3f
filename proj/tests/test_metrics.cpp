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

#include <cmath>
#include <random>
#include <stdexcept>

#include <doctest.h>

#include "test_helpers.hpp"
#include "usinv/metrics.hpp"
#include "usinv/phantom.hpp"
#include "usinv/signal.hpp"

using namespace usinv;

namespace {

RegionMask block(Eigen::Index rows, Eigen::Index cols, Eigen::Index r0, Eigen::Index r1,
                 Eigen::Index c0, Eigen::Index c1) {
  RegionMask region;
  region.mask.setConstant(rows, cols, false);
  for (Eigen::Index i = r0; i < r1; ++i)
    for (Eigen::Index j = c0; j < c1; ++j) region.mask(i, j) = true;
  return region;
}

}  // namespace

TEST_CASE("identical value distributions give exactly zero gcnr") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> dist;
  Eigen::MatrixXd image = Eigen::MatrixXd::Zero(10, 20);
  for (Eigen::Index i = 0; i < 10; ++i)
    for (Eigen::Index j = 0; j < 10; ++j) {
      image(i, j) = dist(rng);
      image(i, j + 10) = image(i, j);  // right half copies the left half
    }
  const RegionMask a = block(10, 20, 0, 10, 0, 10);
  const RegionMask b = block(10, 20, 0, 10, 10, 20);
  CHECK(gcnr(image, a, b) == 0.0);
}

TEST_CASE("disjoint supports give exactly unit gcnr") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> lo(0.0, 1.0), hi(2.0, 3.0);
  Eigen::MatrixXd image = Eigen::MatrixXd::Zero(8, 16);
  for (Eigen::Index i = 0; i < 8; ++i)
    for (Eigen::Index j = 0; j < 8; ++j) {
      image(i, j) = lo(rng);
      image(i, j + 8) = hi(rng);
    }
  const RegionMask a = block(8, 16, 0, 8, 0, 8);
  const RegionMask b = block(8, 16, 0, 8, 8, 16);
  CHECK(gcnr(image, a, b) == 1.0);
}

TEST_CASE("half-overlapping uniforms land near one half") {
  const Eigen::Index n = 1000;  // 1e6 samples per region
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd image = Eigen::MatrixXd::Zero(n, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      image(i, j) = u(rng);
      image(i, j + n) = 0.5 + u(rng);
    }
  const RegionMask a = block(n, 2 * n, 0, n, 0, n);
  const RegionMask b = block(n, 2 * n, 0, n, n, 2 * n);
  const double value = gcnr(image, a, b);
  CHECK(value == doctest::Approx(0.5).epsilon(0.04));
  CHECK(std::abs(value - 0.5) < 0.02);
}

TEST_CASE("gcnr is symmetric in its regions") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> dist;
  Eigen::MatrixXd image(12, 12);
  for (Eigen::Index i = 0; i < 12; ++i)
    for (Eigen::Index j = 0; j < 12; ++j) image(i, j) = dist(rng) + (j >= 6 ? 0.8 : 0.0);
  const RegionMask a = block(12, 12, 0, 12, 0, 6);
  const RegionMask b = block(12, 12, 0, 12, 6, 12);
  CHECK(gcnr(image, a, b) == gcnr(image, b, a));
}

TEST_CASE("gcnr is insensitive to a monotone remap of the values") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  Eigen::MatrixXd image(200, 200);
  for (Eigen::Index i = 0; i < 200; ++i)
    for (Eigen::Index j = 0; j < 200; ++j) image(i, j) = u(rng) + (j >= 100 ? 0.4 : 0.0);
  const RegionMask a = block(200, 200, 0, 200, 0, 100);
  const RegionMask b = block(200, 200, 0, 200, 100, 200);

  const double linear = gcnr(image, a, b);
  const double cubed = gcnr(image.array().cube().matrix(), a, b);
  // Binning shifts under the remap, but the overlap itself is invariant.
  CHECK(std::abs(linear - cubed) < 0.05);
}

TEST_CASE("a constant image carries no contrast") {
  const Eigen::MatrixXd image = Eigen::MatrixXd::Constant(6, 6, 1.5);
  const RegionMask a = block(6, 6, 0, 6, 0, 3);
  const RegionMask b = block(6, 6, 0, 6, 3, 6);
  CHECK(gcnr(image, a, b) == 0.0);
}

TEST_CASE("gcnr rejects malformed regions") {
  const Eigen::MatrixXd image = Eigen::MatrixXd::Random(6, 6);
  const RegionMask a = block(6, 6, 0, 6, 0, 4);
  const RegionMask b = block(6, 6, 0, 6, 3, 6);  // columns 3 overlap
  CHECK_THROWS_WITH_AS((void)gcnr(image, a, b), "metrics: regions overlap",
                       std::invalid_argument);

  const RegionMask empty = block(6, 6, 0, 0, 0, 0);
  const RegionMask c = block(6, 6, 0, 6, 0, 3);
  CHECK_THROWS_WITH_AS((void)gcnr(image, empty, c), "metrics: empty region",
                       std::invalid_argument);

  const RegionMask wrong = block(5, 6, 0, 5, 0, 3);
  CHECK_THROWS_WITH_AS((void)gcnr(image, wrong, c),
                       "metrics: region shape does not match the image",
                       std::invalid_argument);

  const RegionMask d = block(6, 6, 0, 6, 3, 6);
  CHECK_THROWS_AS((void)gcnr(image, c, d, 0), std::invalid_argument);
}

TEST_CASE("rf mse matches a direct average") {
  RFDataCube a = RFDataCube::zeros(2, 3, 4);
  RFDataCube b = RFDataCube::zeros(2, 3, 4);
  CHECK(rf_mse(a, b) == 0.0);

  std::mt19937_64 rng(17);
  std::normal_distribution<float> dist;
  for (float& v : a.samples) v = dist(rng);
  for (float& v : b.samples) v = dist(rng);

  double expect = 0.0;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    const double d = double(a.samples[i]) - double(b.samples[i]);
    expect += d * d;
  }
  expect /= double(a.samples.size());
  CHECK(rf_mse(a, b) == doctest::Approx(expect).epsilon(1e-14));
  CHECK(rf_mse(a, b) == rf_mse(b, a));

  const RFDataCube wrong = RFDataCube::zeros(2, 3, 5);
  CHECK_THROWS_WITH_AS((void)rf_mse(a, wrong), "metrics: cube shapes differ",
                       std::invalid_argument);
}

TEST_CASE("the residual image of a perfect prediction is empty") {
  const double c = 1540.0;
  TransducerGeometry g = testutil::make_geometry(8, 5e6, 20e6, 3e-4);
  TransmitScheme s = testutil::make_plane_scheme(g, 1, 128, 0.0, c);

  ScattererField field;
  field.positions.resize(2, 1);
  field.positions << 0.0, 4e-3;
  field.amplitudes = Eigen::VectorXd::Constant(1, 1.0);
  ModelParams params;
  params.speed_of_sound = c;
  params.element_gain = Eigen::VectorXd::Constant(8, 0.75);
  params.element_width = 0.5 * g.element_width_nominal;
  std::mt19937_64 rng(0);
  const RFDataCube cube = simulate_rf(field, params, g, s,
                                      Eigen::VectorXd::Ones(128), 0.0, rng);

  PixelGrid grid;
  grid.nx = 9;
  grid.nz = 9;
  grid.dx = 1e-4;
  grid.dz = 1e-4;
  grid.origin_x = -4e-4;
  grid.origin_z = 3.6e-3;

  CHECK_THROWS_WITH_AS((void)residual_image(cube, cube, g, s, c, grid), "empty image",
                       std::runtime_error);

  // Predicting silence leaves the observed data as the residual.
  const Eigen::MatrixXd vs_zero =
      residual_image(cube, RFDataCube::zeros(1, 128, 8), g, s, c, grid);
  CHECK(vs_zero.maxCoeff() == 0.0);  // peak normalized
  CHECK(vs_zero.minCoeff() >= -60.0);
}
