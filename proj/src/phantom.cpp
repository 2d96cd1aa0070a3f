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

#include "usinv/phantom.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

namespace usinv {

namespace {

bool region_contains(const PhantomRegion& region, double x, double z) {
  const double dx = x - region.center_x;
  const double dz = z - region.center_z;
  return dx * dx + dz * dz <= region.radius * region.radius;
}

void emit_warning(const std::string& text, std::vector<std::string>* warnings) {
  if (warnings)
    warnings->push_back(text);
  else
    std::cerr << "warning: " << text << "\n";
}

}  // namespace

void PhantomSpec::validate() const {
  if (!(extent_x_hi > extent_x_lo) || !(extent_z_hi > extent_z_lo))
    throw std::invalid_argument("phantom: empty extent");
  if (!(wavelength > 0.0)) throw std::invalid_argument("phantom: wavelength");
  if (!(density_per_wavelength_sq >= 0.0))
    throw std::invalid_argument("phantom: density must be nonnegative");
  if (!(amplitude_hi >= amplitude_lo) || !(amplitude_lo >= 0.0))
    throw std::invalid_argument("phantom: amplitude range");
  for (const PhantomRegion& region : regions) {
    if (region.kind == PhantomRegion::Kind::cyst && !(region.radius > 0.0))
      throw std::invalid_argument("phantom: cyst radius must be positive");
    if (region.kind == PhantomRegion::Kind::cyst && region.echogenicity < 0.0)
      throw std::invalid_argument("phantom: echogenicity must be nonnegative");
    const double r = region.kind == PhantomRegion::Kind::cyst ? region.radius : 0.0;
    if (region.center_x - r < extent_x_lo || region.center_x + r > extent_x_hi ||
        region.center_z - r < extent_z_lo || region.center_z + r > extent_z_hi)
      throw std::invalid_argument("phantom: region leaves the extent");
  }
}

ScattererField gen_phantom(const PhantomSpec& spec, std::mt19937_64& rng,
                           std::vector<std::string>* warnings) {
  spec.validate();

  // Cysts that overlap with conflicting echogenicity are resolved by order;
  // say so once per pair.
  for (std::size_t i = 0; i < spec.regions.size(); ++i)
    for (std::size_t j = i + 1; j < spec.regions.size(); ++j) {
      const PhantomRegion& a = spec.regions[i];
      const PhantomRegion& b = spec.regions[j];
      if (a.kind != PhantomRegion::Kind::cyst || b.kind != PhantomRegion::Kind::cyst)
        continue;
      if (a.echogenicity == b.echogenicity) continue;
      const double dx = a.center_x - b.center_x;
      const double dz = a.center_z - b.center_z;
      const double gap = a.radius + b.radius;
      if (dx * dx + dz * dz < gap * gap)
        emit_warning("phantom: regions " + std::to_string(i) + " and " +
                         std::to_string(j) + " overlap; the later one wins",
                     warnings);
    }

  const double area = (spec.extent_x_hi - spec.extent_x_lo) *
                      (spec.extent_z_hi - spec.extent_z_lo);
  const double mean_count =
      spec.density_per_wavelength_sq * area / (spec.wavelength * spec.wavelength);
  std::poisson_distribution<int> poisson(mean_count);
  const int n_background = mean_count > 0.0 ? poisson(rng) : 0;

  std::uniform_real_distribution<double> ux(spec.extent_x_lo, spec.extent_x_hi);
  std::uniform_real_distribution<double> uz(spec.extent_z_lo, spec.extent_z_hi);
  std::uniform_real_distribution<double> ua(spec.amplitude_lo, spec.amplitude_hi);

  int n_wires = 0;
  for (const PhantomRegion& region : spec.regions)
    if (region.kind == PhantomRegion::Kind::wire) ++n_wires;

  ScattererField field;
  field.positions.resize(2, n_background + n_wires);
  field.amplitudes.resize(n_background + n_wires);

  for (int s = 0; s < n_background; ++s) {
    const double x = ux(rng);
    const double z = uz(rng);
    double scale = 1.0;
    for (const PhantomRegion& region : spec.regions)
      if (region.kind == PhantomRegion::Kind::cyst && region_contains(region, x, z))
        scale = region.echogenicity;  // last containing cyst wins

    field.positions(0, s) = x;
    field.positions(1, s) = z;
    field.amplitudes[s] = ua(rng) * scale;
  }

  int cursor = n_background;
  for (const PhantomRegion& region : spec.regions) {
    if (region.kind != PhantomRegion::Kind::wire) continue;
    field.positions(0, cursor) = region.center_x;
    field.positions(1, cursor) = region.center_z;
    field.amplitudes[cursor] = region.amplitude;
    ++cursor;
  }
  return field;
}

RFDataCube simulate_rf(const ScattererField& field, const ModelParams& params,
                       const TransducerGeometry& geometry, const TransmitScheme& scheme,
                       const Eigen::VectorXd& tgc, double noise_std,
                       std::mt19937_64& rng, ModelKind kind,
                       const FeatureToggles& toggles) {
  if (noise_std < 0.0) throw std::invalid_argument("phantom: negative noise level");

  const int n_tx = int(scheme.num_transmits());
  const int n_ft = scheme.n_fast_time;
  const int n_ch = int(geometry.num_channels());

  const ForwardModel model(geometry, scheme, tgc, kind, toggles);
  std::vector<SampleIndex> batch;
  batch.reserve(std::size_t(n_tx) * n_ft * n_ch);
  for (int tx = 0; tx < n_tx; ++tx)
    for (int ft = 0; ft < n_ft; ++ft)
      for (int ch = 0; ch < n_ch; ++ch) batch.push_back({tx, ft, ch});
  const Eigen::VectorXd prediction = model.predict_batch(batch, field, params);

  RFDataCube cube = RFDataCube::zeros(n_tx, n_ft, n_ch);
  cube.tgc_curve = tgc;
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    double value = prediction[Eigen::Index(i)];
    if (noise_std > 0.0) value += tgc[batch[i].ft] * noise_std * gauss(rng);
    cube.samples[i] = float(value);
  }
  return cube;
}

}  // namespace usinv
