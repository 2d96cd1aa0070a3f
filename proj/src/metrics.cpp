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

#include "usinv/metrics.hpp"

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "usinv/signal.hpp"

namespace usinv {

namespace {

std::vector<double> masked_values(const Eigen::MatrixXd& image, const RegionMask& region) {
  std::vector<double> values;
  values.reserve(std::size_t(region.count()));
  for (Eigen::Index i = 0; i < image.rows(); ++i)
    for (Eigen::Index j = 0; j < image.cols(); ++j)
      if (region.mask(i, j)) values.push_back(image(i, j));
  return values;
}

}  // namespace

double gcnr(const Eigen::MatrixXd& image, const RegionMask& region_a,
            const RegionMask& region_b, int bins) {
  if (bins < 1) throw std::invalid_argument("metrics: bins must be at least 1");
  if (region_a.mask.rows() != image.rows() || region_a.mask.cols() != image.cols() ||
      region_b.mask.rows() != image.rows() || region_b.mask.cols() != image.cols())
    throw std::invalid_argument("metrics: region shape does not match the image");
  if (region_a.count() == 0 || region_b.count() == 0)
    throw std::invalid_argument("metrics: empty region");
  if ((region_a.mask && region_b.mask).any())
    throw std::invalid_argument("metrics: regions overlap");

  const std::vector<double> va = masked_values(image, region_a);
  const std::vector<double> vb = masked_values(image, region_b);
  double lo = va[0], hi = va[0];
  for (double v : va) lo = std::min(lo, v), hi = std::max(hi, v);
  for (double v : vb) lo = std::min(lo, v), hi = std::max(hi, v);
  if (hi == lo) return 0.0;  // a single shared intensity: full overlap

  const auto histogram = [&](const std::vector<double>& values) {
    std::vector<std::int64_t> counts(std::size_t(bins), 0);
    for (double v : values) {
      int k = int((v - lo) / (hi - lo) * bins);
      k = std::min(std::max(k, 0), bins - 1);
      ++counts[std::size_t(k)];
    }
    return counts;
  };
  const std::vector<std::int64_t> ha = histogram(va);
  const std::vector<std::int64_t> hb = histogram(vb);

  // Overlap as exact integer arithmetic on common denominator |a|·|b|, so
  // identical distributions give exactly 0 and disjoint supports exactly 1.
  const std::int64_t ta = std::int64_t(va.size());
  const std::int64_t tb = std::int64_t(vb.size());
  std::int64_t overlap = 0;
  for (int k = 0; k < bins; ++k)
    overlap += std::min(ha[std::size_t(k)] * tb, hb[std::size_t(k)] * ta);
  return 1.0 - double(overlap) / double(ta * tb);
}

double rf_mse(const RFDataCube& observed, const RFDataCube& predicted) {
  if (observed.n_tx != predicted.n_tx || observed.n_ft != predicted.n_ft ||
      observed.n_ch != predicted.n_ch)
    throw std::invalid_argument("metrics: cube shapes differ");
  if (observed.total_samples() == 0)
    throw std::invalid_argument("metrics: empty cubes");

  double acc = 0.0;
  for (std::size_t i = 0; i < observed.samples.size(); ++i) {
    const double d = double(observed.samples[i]) - double(predicted.samples[i]);
    acc += d * d;
  }
  return acc / double(observed.total_samples());
}

Eigen::MatrixXd residual_image(const RFDataCube& observed, const RFDataCube& predicted,
                               const TransducerGeometry& geometry,
                               const TransmitScheme& scheme, double c,
                               const PixelGrid& grid, const BeamformParams& params,
                               double dynamic_range_db) {
  if (observed.n_tx != predicted.n_tx || observed.n_ft != predicted.n_ft ||
      observed.n_ch != predicted.n_ch)
    throw std::invalid_argument("metrics: cube shapes differ");

  RFDataCube residual = observed;
  for (std::size_t i = 0; i < residual.samples.size(); ++i)
    residual.samples[i] = observed.samples[i] - predicted.samples[i];

  const Waveform& pulse = scheme.waveforms.at(0);
  const double bandwidth = band_minus6db(pulse.samples, pulse.sample_rate).width();
  const IQCube iq = iq_demodulate(residual, geometry.center_frequency,
                                  geometry.sampling_frequency, 5, bandwidth);
  const std::vector<Eigen::MatrixXcd> images =
      beamform_image(iq, grid, geometry, scheme, c, BeamformMethod::das, params);
  return compound_and_compress(images, dynamic_range_db);
}

}  // namespace usinv
