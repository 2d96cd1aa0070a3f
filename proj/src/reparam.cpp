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

#include "usinv/reparam.hpp"

#include <cmath>
#include <stdexcept>

namespace usinv {

namespace {

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double logit(double y, const char* what) {
  if (!(y > 0.0) || !(y < 1.0))
    throw std::invalid_argument(std::string("reparam: ") + what + " not representable");
  return std::log(y / (1.0 - y));
}

inline double safe_log(double y, const char* what) {
  if (!(y > 0.0))
    throw std::invalid_argument(std::string("reparam: ") + what + " not representable");
  return std::log(y);
}

}  // namespace

FreeVariables FreeVariables::zero(Eigen::Index n_sc, Eigen::Index n_ch) {
  FreeVariables xi;
  xi.xi_amplitudes = Eigen::VectorXd::Zero(n_sc);
  xi.xi_positions = Eigen::Matrix2Xd::Zero(2, n_sc);
  xi.xi_gamma = Eigen::VectorXd::Zero(n_ch);
  return xi;
}

Eigen::VectorXd FreeVariables::to_flat() const {
  const Eigen::Index n = n_sc();
  Eigen::VectorXd flat(flat_size());
  flat.head(n) = xi_amplitudes;
  for (Eigen::Index s = 0; s < n; ++s) {
    flat[n + 2 * s] = xi_positions(0, s);
    flat[n + 2 * s + 1] = xi_positions(1, s);
  }
  Eigen::Index k = 3 * n;
  flat[k++] = xi_elw;
  flat[k++] = xi_c;
  flat[k++] = xi_mu;
  flat[k++] = xi_t0;
  flat.segment(k, n_ch()) = xi_gamma;
  k += n_ch();
  flat[k++] = xi_lp_a;
  flat[k++] = xi_lp_b;
  return flat;
}

FreeVariables FreeVariables::from_flat(const Eigen::VectorXd& flat, Eigen::Index n_sc,
                                       Eigen::Index n_ch) {
  FreeVariables xi = zero(n_sc, n_ch);
  if (flat.size() != xi.flat_size())
    throw std::invalid_argument("reparam: flat vector has the wrong length");
  xi.xi_amplitudes = flat.head(n_sc);
  for (Eigen::Index s = 0; s < n_sc; ++s) {
    xi.xi_positions(0, s) = flat[n_sc + 2 * s];
    xi.xi_positions(1, s) = flat[n_sc + 2 * s + 1];
  }
  Eigen::Index k = 3 * n_sc;
  xi.xi_elw = flat[k++];
  xi.xi_c = flat[k++];
  xi.xi_mu = flat[k++];
  xi.xi_t0 = flat[k++];
  xi.xi_gamma = flat.segment(k, n_ch);
  k += n_ch;
  xi.xi_lp_a = flat[k++];
  xi.xi_lp_b = flat[k++];
  return xi;
}

bool FreeVariables::all_finite() const {
  return xi_amplitudes.allFinite() && xi_positions.allFinite() && xi_gamma.allFinite() &&
         std::isfinite(xi_elw) && std::isfinite(xi_c) && std::isfinite(xi_mu) &&
         std::isfinite(xi_t0) && std::isfinite(xi_lp_a) && std::isfinite(xi_lp_b);
}

VarGroup group_of(Eigen::Index flat_index, Eigen::Index n_sc, Eigen::Index) {
  if (flat_index < n_sc) return VarGroup::amplitude;
  if (flat_index < 3 * n_sc) return VarGroup::position;
  return VarGroup::physics;
}

ReparamSpec ReparamSpec::from_geometry(const TransducerGeometry& geometry,
                                       double speed_lo, double speed_hi) {
  ReparamSpec spec;
  spec.element_width_nominal = geometry.element_width_nominal;
  spec.speed_lo = speed_lo;
  spec.speed_hi = speed_hi;
  const double period = 1.0 / geometry.center_frequency;
  spec.time_offset_lo = -2.0 * period;
  spec.time_offset_hi = 2.0 * period;
  spec.position_scale = 0.5 * (speed_lo + speed_hi) / geometry.center_frequency;
  return spec;
}

void ReparamSpec::validate() const {
  if (!(element_width_nominal > 0.0))
    throw std::invalid_argument("reparam: nominal element width must be positive");
  if (!(speed_hi > speed_lo) || !(time_offset_hi > time_offset_lo))
    throw std::invalid_argument("reparam: sigmoid bounds must satisfy hi > lo");
  if (!(position_scale > 0.0))
    throw std::invalid_argument("reparam: position scale must be positive");
  if (!(scatterer_radius > 0.0))
    throw std::invalid_argument("reparam: scatterer radius must be positive");
}

std::pair<ScattererField, ModelParams> constrain(const FreeVariables& xi,
                                                 const ReparamSpec& spec) {
  spec.validate();
  ScattererField field;
  field.amplitudes = xi.xi_amplitudes.array().exp();
  field.positions = spec.position_scale * xi.xi_positions;

  ModelParams params;
  params.element_width = spec.element_width_nominal * sigmoid(xi.xi_elw);
  params.speed_of_sound = spec.speed_lo + (spec.speed_hi - spec.speed_lo) * sigmoid(xi.xi_c);
  params.attenuation_coeff = std::exp(xi.xi_mu);
  params.initial_time_offset =
      spec.time_offset_lo + (spec.time_offset_hi - spec.time_offset_lo) * sigmoid(xi.xi_t0);
  params.element_gain = xi.xi_gamma.unaryExpr(
      [](double x) { return 0.5 * (1.0 + sigmoid(x)); });
  params.lowpass_intercept = std::exp(xi.xi_lp_a);
  params.lowpass_slope = std::exp(xi.xi_lp_b);
  params.scatterer_radius = spec.scatterer_radius;
  return {std::move(field), std::move(params)};
}

FreeVariables unconstrain(const ScattererField& field, const ModelParams& params,
                          const ReparamSpec& spec) {
  spec.validate();
  FreeVariables xi = FreeVariables::zero(field.size(), params.element_gain.size());
  for (Eigen::Index s = 0; s < field.size(); ++s)
    xi.xi_amplitudes[s] = safe_log(field.amplitudes[s], "amplitude");
  xi.xi_positions = field.positions / spec.position_scale;

  xi.xi_elw = logit(params.element_width / spec.element_width_nominal, "element width");
  xi.xi_c = logit((params.speed_of_sound - spec.speed_lo) / (spec.speed_hi - spec.speed_lo),
                  "speed of sound");
  xi.xi_mu = safe_log(params.attenuation_coeff, "attenuation coefficient");
  xi.xi_t0 = logit((params.initial_time_offset - spec.time_offset_lo) /
                       (spec.time_offset_hi - spec.time_offset_lo),
                   "time offset");
  for (Eigen::Index ch = 0; ch < params.element_gain.size(); ++ch)
    xi.xi_gamma[ch] = logit(2.0 * params.element_gain[ch] - 1.0, "element gain");
  xi.xi_lp_a = safe_log(params.lowpass_intercept, "low-pass intercept");
  xi.xi_lp_b = safe_log(params.lowpass_slope, "low-pass slope");
  return xi;
}

GradientVector chain_gradient(const ModelGradient& phys, const FreeVariables& xi,
                              const ReparamSpec& spec) {
  GradientVector g = FreeVariables::zero(xi.n_sc(), xi.n_ch());

  // d(exp(x))/dx = exp(x); d(lo+(hi-lo)s(x))/dx = (hi-lo)s(1-s).
  g.xi_amplitudes = phys.d_amplitudes.array() * xi.xi_amplitudes.array().exp();
  g.xi_positions = spec.position_scale * phys.d_positions;

  const double s_elw = sigmoid(xi.xi_elw);
  g.xi_elw = phys.d_element_width * spec.element_width_nominal * s_elw * (1.0 - s_elw);
  const double s_c = sigmoid(xi.xi_c);
  g.xi_c = phys.d_speed * (spec.speed_hi - spec.speed_lo) * s_c * (1.0 - s_c);
  g.xi_mu = phys.d_attenuation * std::exp(xi.xi_mu);
  const double s_t0 = sigmoid(xi.xi_t0);
  g.xi_t0 = phys.d_time_offset * (spec.time_offset_hi - spec.time_offset_lo) * s_t0 * (1.0 - s_t0);
  for (Eigen::Index ch = 0; ch < xi.n_ch(); ++ch) {
    const double s = sigmoid(xi.xi_gamma[ch]);
    g.xi_gamma[ch] = phys.d_element_gain[ch] * 0.5 * s * (1.0 - s);
  }
  g.xi_lp_a = phys.d_lowpass_intercept * std::exp(xi.xi_lp_a);
  g.xi_lp_b = phys.d_lowpass_slope * std::exp(xi.xi_lp_b);
  return g;
}

}  // namespace usinv
