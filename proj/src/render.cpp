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

#include "usinv/render.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "usinv/parallel.hpp"

namespace usinv {

namespace {

/// Cell coordinate hashed into one map key; cells are cutoff-sized so a
/// pixel only ever gathers from its own cell and the eight neighbors.
std::int64_t cell_key(std::int64_t cx, std::int64_t cz) {
  return cx * 0x100000001LL + cz;
}

}  // namespace

Eigen::MatrixXd kde_image(const ScattererField& field, const PixelGrid& grid, double r,
                          bool weight_by_amplitude) {
  if (!(r > 0.0)) throw std::invalid_argument("render: radius must be positive");
  grid.validate();

  const double cutoff = 6.0 * r;
  const double cutoff_sq = cutoff * cutoff;

  // Bucket scatterers by cell, preserving index order within each bucket.
  std::unordered_map<std::int64_t, std::vector<int>> cells;
  for (Eigen::Index i = 0; i < field.size(); ++i) {
    const std::int64_t cx = std::int64_t(std::floor(field.positions(0, i) / cutoff));
    const std::int64_t cz = std::int64_t(std::floor(field.positions(1, i) / cutoff));
    cells[cell_key(cx, cz)].push_back(int(i));
  }

  Eigen::MatrixXd image(grid.nz, grid.nx);
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (int iz = 0; iz < grid.nz; ++iz) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      const double px = grid.x(ix);
      const double pz = grid.z(iz);
      const std::int64_t cx = std::int64_t(std::floor(px / cutoff));
      const std::int64_t cz = std::int64_t(std::floor(pz / cutoff));
      double acc = 0.0;
      for (std::int64_t nx_ = cx - 1; nx_ <= cx + 1; ++nx_)
        for (std::int64_t nz_ = cz - 1; nz_ <= cz + 1; ++nz_) {
          const auto it = cells.find(cell_key(nx_, nz_));
          if (it == cells.end()) continue;
          for (int i : it->second) {
            const double dx = px - field.positions(0, i);
            const double dz = pz - field.positions(1, i);
            const double d_sq = dx * dx + dz * dz;
            if (d_sq > cutoff_sq) continue;
            const double k = std::exp(-d_sq / (r * r));
            acc += weight_by_amplitude ? field.amplitudes[i] * k : k;
          }
        }
      image(iz, ix) = acc;
    }
  }
  return image;
}

}  // namespace usinv
