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

#include "usinv/render.hpp"

using namespace usinv;

namespace {

ScattererField single(double x, double z, double amplitude) {
  ScattererField f;
  f.positions.resize(2, 1);
  f.positions(0, 0) = x;
  f.positions(1, 0) = z;
  f.amplitudes = Eigen::VectorXd::Constant(1, amplitude);
  return f;
}

PixelGrid square_grid(int n, double origin_x, double origin_z, double d) {
  PixelGrid g;
  g.nx = n;
  g.nz = n;
  g.dx = d;
  g.dz = d;
  g.origin_x = origin_x;
  g.origin_z = origin_z;
  return g;
}

ScattererField random_field(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> x(-1e-3, 1e-3), z(2e-3, 4e-3), a(0.2, 2.0);
  ScattererField f;
  f.positions.resize(2, n);
  f.amplitudes.resize(n);
  for (int s = 0; s < n; ++s) {
    f.positions(0, s) = x(rng);
    f.positions(1, s) = z(rng);
    f.amplitudes[s] = a(rng);
  }
  return f;
}

}  // namespace

TEST_CASE("the kernel takes its exact values at the center and at one radius") {
  const double r = 2e-4;
  const PixelGrid grid = square_grid(9, -8e-4, 2.2e-3, 2e-4);
  // Scatterer on the pixel (4, 4) center.
  const double cx = grid.x(4), cz = grid.z(4);
  const Eigen::MatrixXd img = kde_image(single(cx, cz, 1.7), grid, r);

  CHECK(img(4, 4) == 1.7);
  // Pixel (4, 5) sits exactly one radius away laterally.
  CHECK(img(4, 5) == doctest::Approx(1.7 * std::exp(-1.0)).epsilon(1e-13));
  // Pixel (8, 8) sits 4*sqrt(2) radii away, still inside the cutoff.
  CHECK(img(8, 8) == doctest::Approx(1.7 * std::exp(-32.0)).epsilon(1e-12));
}

TEST_CASE("contributions beyond the cutoff vanish identically") {
  const double r = 1e-4;
  const PixelGrid grid = square_grid(3, 0.0, 0.0, 1e-5);
  const Eigen::MatrixXd img = kde_image(single(10.0 * r, 0.0, 1.0), grid, r);
  CHECK(img.isZero(0.0));
}

TEST_CASE("coincident scatterers double the field") {
  const double r = 2e-4;
  const PixelGrid grid = square_grid(7, -6e-4, 1e-3, 2e-4);
  ScattererField one = single(0.0, 1.6e-3, 0.9);
  ScattererField two;
  two.positions.resize(2, 2);
  two.positions.col(0) = one.positions.col(0);
  two.positions.col(1) = one.positions.col(0);
  two.amplitudes = Eigen::VectorXd::Constant(2, 0.9);

  const Eigen::MatrixXd img_one = kde_image(one, grid, r);
  const Eigen::MatrixXd img_two = kde_image(two, grid, r);
  CHECK(img_two == 2.0 * img_one);
}

TEST_CASE("the field is additive over scatterer subsets") {
  std::mt19937_64 rng(19);
  const ScattererField a = random_field(17, rng);
  const ScattererField b = random_field(23, rng);
  ScattererField both;
  both.positions.resize(2, a.size() + b.size());
  both.positions << a.positions, b.positions;
  both.amplitudes.resize(a.size() + b.size());
  both.amplitudes << a.amplitudes, b.amplitudes;

  const double r = 3e-4;
  const PixelGrid grid = square_grid(33, -1.2e-3, 1.8e-3, 1e-4);
  const Eigen::MatrixXd sum = kde_image(a, grid, r) + kde_image(b, grid, r);
  const Eigen::MatrixXd joint = kde_image(both, grid, r);
  CHECK((joint - sum).cwiseAbs().maxCoeff() < 1e-12 * std::max(1.0, sum.maxCoeff()));
}

TEST_CASE("translating scene and grid together leaves the image unchanged") {
  std::mt19937_64 rng(29);
  ScattererField f = random_field(25, rng);
  const double r = 2.5e-4;
  const PixelGrid grid = square_grid(21, -1e-3, 2e-3, 1e-4);
  const Eigen::MatrixXd base = kde_image(f, grid, r);

  const double sx = 7.25e-4, sz = -3.5e-4;
  ScattererField moved = f;
  moved.positions.row(0).array() += sx;
  moved.positions.row(1).array() += sz;
  PixelGrid shifted = grid;
  shifted.origin_x += sx;
  shifted.origin_z += sz;
  const Eigen::MatrixXd after = kde_image(moved, shifted, r);

  CHECK((after - base).cwiseAbs().maxCoeff() < 1e-9 * base.maxCoeff());
}

TEST_CASE("the weighted image is homogeneous in the amplitudes") {
  std::mt19937_64 rng(31);
  ScattererField f = random_field(20, rng);
  const double r = 2e-4;
  const PixelGrid grid = square_grid(19, -0.9e-3, 2.1e-3, 1e-4);
  const Eigen::MatrixXd base = kde_image(f, grid, r);

  ScattererField scaled = f;
  scaled.amplitudes *= 3.25;
  const Eigen::MatrixXd big = kde_image(scaled, grid, r);
  CHECK((big - 3.25 * base).cwiseAbs().maxCoeff() < 1e-12 * big.maxCoeff());
}

TEST_CASE("the unweighted image ignores the amplitudes") {
  std::mt19937_64 rng(37);
  ScattererField f = random_field(15, rng);
  const double r = 2e-4;
  const PixelGrid grid = square_grid(15, -0.7e-3, 2.3e-3, 1e-4);

  ScattererField flat = f;
  flat.amplitudes.setConstant(1.0);
  const Eigen::MatrixXd weighted_flat = kde_image(flat, grid, r, true);
  const Eigen::MatrixXd unweighted = kde_image(f, grid, r, false);
  CHECK(unweighted == weighted_flat);
}

TEST_CASE("the radius must be positive") {
  const PixelGrid grid = square_grid(5, 0.0, 0.0, 1e-4);
  CHECK_THROWS_WITH_AS((void)kde_image(single(0, 0, 1), grid, 0.0),
                       "render: radius must be positive", std::invalid_argument);
  CHECK_THROWS_AS((void)kde_image(single(0, 0, 1), grid, -1.0), std::invalid_argument);
}

TEST_CASE("an empty field renders to zero") {
  ScattererField f;
  f.positions.resize(2, 0);
  f.amplitudes.resize(0);
  const PixelGrid grid = square_grid(6, 0.0, 0.0, 1e-4);
  CHECK(kde_image(f, grid, 1e-4).isZero(0.0));
}
