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

#include <span>
#include <vector>

#include <Eigen/Core>

#include "usinv/core.hpp"

namespace usinv {

/// Address of one RF sample in the (transmit, fast time, channel) cube.
struct SampleIndex {
  int tx = 0;
  int ft = 0;
  int ch = 0;
};

/// Independent on/off switches for the physical factors of the measurement
/// model. A disabled factor contributes 1 (or a zero time shift) and its
/// parameters receive no gradient.
struct FeatureToggles {
  bool directivity = true;
  bool element_gain = true;
  bool spread = true;
  bool absorption = true;
  bool deformation = true;
  bool time_offset = true;
  bool tgc = true;

  static FeatureToggles all_off() {
    return {false, false, false, false, false, false, false};
  }
};

/**
 * Transmit pulse with pre-computed low-pass filtered variants, used to
 * model frequency dependent attenuation. Variant 0 is the unfiltered pulse
 * verbatim; cutoffs (as fractions of Nyquist) decrease strictly with the
 * variant index. Evaluation interpolates linearly in time within a variant
 * and linearly between the two variants bracketing the requested cutoff;
 * cutoffs beyond the grid ends clamp to the end variants.
 */
class WaveformBank {
 public:
  WaveformBank() = default;
  WaveformBank(const Waveform& base, int n_variants, double min_cutoff);

  int variants() const { return int(samples_.size()); }
  double cutoff(int k) const { return cutoffs_[k]; }
  const Eigen::VectorXd& variant(int k) const { return samples_[k]; }
  double start_time() const { return start_; }
  double sample_rate() const { return rate_; }

  struct Eval {
    double value = 0.0;
    double d_time = 0.0;    // slope of the active interpolation segment
    double d_cutoff = 0.0;  // change per unit normalized cutoff; 0 when clamped
  };
  /// Value and partials of the deformed pulse at time `t` for normalized
  /// cutoff `omega`. Zero (with zero partials) outside the pulse support.
  Eval eval(double t, double omega) const;

 private:
  std::vector<Eigen::VectorXd> samples_;
  Eigen::VectorXd cutoffs_;
  double start_ = 0.0;
  double rate_ = 0.0;
};

/// Travel time between two points at speed of sound c.
double travel_time(const Eigen::Vector2d& p_a, const Eigen::Vector2d& p_b, double c);

/// Element directivity sinc(elw·sin(theta)/lambda)·cos(theta), with the
/// normalized sinc convention sinc(x) = sin(pi x)/(pi x).
double directivity(double theta, double elw, double lambda);

/// Absorption attenuation 10^(-(mu/20)·f_c[MHz]·path[cm]) over the two-way
/// path d_tx + d_rx, with mu in dB/cm/MHz.
double attenuation_absorption(double d_tx, double d_rx, double f_c, double mu);

/// Geometric spreading r/d. Throws std::domain_error when d = 0.
double attenuation_spread(double d, double r);

enum class ModelKind { full, wavefront };

/// Per-parameter partial derivative accumulator for one prediction run.
/// Layout mirrors (ScattererField, ModelParams).
struct ModelGradient {
  Eigen::VectorXd d_amplitudes;
  Eigen::Matrix2Xd d_positions;
  double d_speed = 0.0;
  double d_attenuation = 0.0;
  double d_element_width = 0.0;
  double d_time_offset = 0.0;
  double d_lowpass_intercept = 0.0;
  double d_lowpass_slope = 0.0;
  Eigen::VectorXd d_element_gain;

  static ModelGradient zero(Eigen::Index n_sc, Eigen::Index n_ch);
  void add(const ModelGradient& other);
};

/// Per-thread scratch space for the per-sample kernels.
struct ForwardWorkspace {
  Eigen::VectorXd d_rx, sin_rx, cos_rx;
  std::vector<int> best_el;
  Eigen::VectorXd d_tx_best;
};

/**
 * Matrix-free differentiable map from (ScattererField, ModelParams) to
 * predicted RF samples. The full model sums the response over every firing
 * element of a transmit; the wavefront model keeps only the first wave to
 * reach each scatterer, attributing it to the earliest-arrival element.
 *
 * The object captures geometry, scheme, gain curve, and feature toggles at
 * construction and is immutable afterwards; all prediction entry points
 * are const and safe to call concurrently.
 */
class ForwardModel {
 public:
  ForwardModel(const TransducerGeometry& geometry, const TransmitScheme& scheme,
               Eigen::VectorXd tgc_curve, ModelKind kind = ModelKind::wavefront,
               FeatureToggles toggles = FeatureToggles(), int bank_variants = 8,
               double bank_min_cutoff = 0.1);

  double predict_sample(const SampleIndex& idx, const ScattererField& field,
                        const ModelParams& params) const;

  /// Vectorized prediction, element i matching the single-sample call for
  /// batch[i]; parallel across samples.
  Eigen::VectorXd predict_batch(std::span<const SampleIndex> batch,
                                const ScattererField& field,
                                const ModelParams& params) const;

  /**
   * Shared value-and-gradient kernel: returns the predicted amplitude and,
   * when `grad` is nonnull, adds weight·(d prediction/d theta) to it for
   * every physical parameter theta. Toggled-off factors contribute zero
   * partials. `ws` provides caller-owned scratch, one per thread.
   */
  double accumulate_sample(const SampleIndex& idx, const ScattererField& field,
                           const ModelParams& params, double weight,
                           ModelGradient* grad, ForwardWorkspace& ws) const;

  ModelKind kind() const { return kind_; }
  const FeatureToggles& toggles() const { return toggles_; }
  const TransducerGeometry& geometry() const { return geometry_; }
  const TransmitScheme& scheme() const { return scheme_; }
  const Eigen::VectorXd& tgc() const { return tgc_; }
  const WaveformBank& bank(int tx) const { return banks_[std::size_t(tx)]; }
  const std::vector<int>& firing_elements(int tx) const { return firing_[std::size_t(tx)]; }

 private:
  TransducerGeometry geometry_;
  TransmitScheme scheme_;
  Eigen::VectorXd tgc_;
  ModelKind kind_;
  FeatureToggles toggles_;
  std::vector<WaveformBank> banks_;
  std::vector<std::vector<int>> firing_;
};

}  // namespace usinv
