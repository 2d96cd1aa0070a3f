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

#include "usinv/forward.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>

#include "usinv/parallel.hpp"
#include "usinv/signal.hpp"

namespace usinv {

namespace {

constexpr double kLn10 = 2.302585092994046;

// Normalized sinc with a series fallback near zero where the quotient
// loses precision.
inline double sinc(double x) {
  const double px = M_PI * x;
  if (std::abs(x) < 1e-4) return 1.0 - px * px / 6.0 * (1.0 - px * px / 20.0);
  return std::sin(px) / px;
}

inline double dsinc(double x) {
  const double px = M_PI * x;
  if (std::abs(x) < 1e-4) return -x * (M_PI * M_PI / 3.0) * (1.0 - px * px / 10.0);
  return (std::cos(px) - std::sin(px) / px) / x;
}

}  // namespace

WaveformBank::WaveformBank(const Waveform& base, int n_variants, double min_cutoff) {
  if (base.samples.size() < 2 || !(base.sample_rate > 0.0))
    throw std::invalid_argument("waveform bank: degenerate base waveform");
  if (n_variants < 1)
    throw std::invalid_argument("waveform bank: need at least one variant");
  if (n_variants > 1 && (!(min_cutoff > 0.0) || min_cutoff >= 1.0))
    throw std::invalid_argument("waveform bank: min cutoff must be in (0, 1)");

  start_ = base.start_time;
  rate_ = base.sample_rate;
  cutoffs_.resize(n_variants);
  samples_.reserve(std::size_t(n_variants));
  // The unfiltered pulse is kept verbatim as variant 0.
  samples_.push_back(base.samples);
  cutoffs_[0] = 1.0;
  for (int k = 1; k < n_variants; ++k) {
    const double w = std::pow(min_cutoff, double(k) / double(n_variants - 1));
    cutoffs_[k] = w;
    const int half = int(std::ceil(4.0 / w));
    samples_.push_back(convolve_same(base.samples, design_lowpass_fir(w, half)));
  }
}

WaveformBank::Eval WaveformBank::eval(double t, double omega) const {
  Eval out;
  const int n = int(samples_[0].size());
  const double x = (t - start_) * rate_;
  if (x < 0.0 || x > double(n - 1)) return out;
  int j = int(x);
  double f = x - j;
  if (j >= n - 1) {
    j = n - 2;
    f = 1.0;
  }

  // Bracket the requested cutoff in the descending grid; outside it the end
  // variants apply with zero cutoff sensitivity.
  const int kv = variants();
  int i = 0;
  double g = 0.0;
  double dg = 0.0;
  if (kv > 1 && omega < cutoffs_[0]) {
    if (omega <= cutoffs_[kv - 1]) {
      i = kv - 2;
      g = 1.0;
    } else {
      while (omega < cutoffs_[i + 1]) ++i;
      const double span = cutoffs_[i] - cutoffs_[i + 1];
      g = (cutoffs_[i] - omega) / span;
      dg = -1.0 / span;
    }
  }

  const Eigen::VectorXd& s0 = samples_[std::size_t(i)];
  const double v0 = s0[j] * (1.0 - f) + s0[j + 1] * f;
  const double m0 = (s0[j + 1] - s0[j]) * rate_;
  if (g == 0.0) {
    out.value = v0;
    out.d_time = m0;
    return out;
  }
  const Eigen::VectorXd& s1 = samples_[std::size_t(i) + 1];
  const double v1 = s1[j] * (1.0 - f) + s1[j + 1] * f;
  const double m1 = (s1[j + 1] - s1[j]) * rate_;
  out.value = (1.0 - g) * v0 + g * v1;
  out.d_time = (1.0 - g) * m0 + g * m1;
  out.d_cutoff = (v1 - v0) * dg;
  return out;
}

double travel_time(const Eigen::Vector2d& p_a, const Eigen::Vector2d& p_b, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("travel_time: speed must be positive");
  return (p_a - p_b).norm() / c;
}

double directivity(double theta, double elw, double lambda) {
  if (!(lambda > 0.0) || !(elw > 0.0))
    throw std::invalid_argument("directivity: width and wavelength must be positive");
  return sinc(elw * std::sin(theta) / lambda) * std::cos(theta);
}

double attenuation_absorption(double d_tx, double d_rx, double f_c, double mu) {
  if (d_tx < 0.0 || d_rx < 0.0 || mu < 0.0)
    throw std::invalid_argument("attenuation_absorption: negative input");
  return std::pow(10.0, -(mu / 20.0) * (f_c * 1e-6) * (100.0 * (d_tx + d_rx)));
}

double attenuation_spread(double d, double r) {
  if (d == 0.0) throw std::domain_error("scatterer coincides with element");
  if (!(d > 0.0) || !(r > 0.0))
    throw std::invalid_argument("attenuation_spread: negative geometry");
  return r / d;
}

ModelGradient ModelGradient::zero(Eigen::Index n_sc, Eigen::Index n_ch) {
  ModelGradient g;
  g.d_amplitudes = Eigen::VectorXd::Zero(n_sc);
  g.d_positions = Eigen::Matrix2Xd::Zero(2, n_sc);
  g.d_element_gain = Eigen::VectorXd::Zero(n_ch);
  return g;
}

void ModelGradient::add(const ModelGradient& other) {
  d_amplitudes += other.d_amplitudes;
  d_positions += other.d_positions;
  d_speed += other.d_speed;
  d_attenuation += other.d_attenuation;
  d_element_width += other.d_element_width;
  d_time_offset += other.d_time_offset;
  d_lowpass_intercept += other.d_lowpass_intercept;
  d_lowpass_slope += other.d_lowpass_slope;
  d_element_gain += other.d_element_gain;
}

ForwardModel::ForwardModel(const TransducerGeometry& geometry, const TransmitScheme& scheme,
                           Eigen::VectorXd tgc_curve, ModelKind kind,
                           FeatureToggles toggles, int bank_variants, double bank_min_cutoff)
    : geometry_(geometry),
      scheme_(scheme),
      tgc_(std::move(tgc_curve)),
      kind_(kind),
      toggles_(toggles) {
  const Eigen::Index n_tx = scheme_.num_transmits();
  if (Eigen::Index(scheme_.waveforms.size()) != n_tx)
    throw std::invalid_argument("forward: waveform count does not match transmits");
  if (tgc_.size() == 0) tgc_ = Eigen::VectorXd::Ones(scheme_.n_fast_time);
  if (tgc_.size() != scheme_.n_fast_time)
    throw std::invalid_argument("forward: gain curve length does not match fast time");

  banks_.reserve(std::size_t(n_tx));
  firing_.resize(std::size_t(n_tx));
  for (Eigen::Index t = 0; t < n_tx; ++t) {
    banks_.emplace_back(scheme_.waveforms[std::size_t(t)], bank_variants, bank_min_cutoff);
    for (Eigen::Index e = 0; e < scheme_.apodization.cols(); ++e)
      if (scheme_.apodization(t, e) > 0.0) firing_[std::size_t(t)].push_back(int(e));
    if (firing_[std::size_t(t)].empty())
      throw std::invalid_argument("forward: transmit has no firing element");
  }
}

double ForwardModel::accumulate_sample(const SampleIndex& idx, const ScattererField& field,
                                       const ModelParams& params, double weight,
                                       ModelGradient* grad, ForwardWorkspace& ws) const {
  const int n_sc = int(field.size());
  const int n_ch = int(geometry_.num_channels());
  if (idx.tx < 0 || idx.tx >= int(scheme_.num_transmits()) || idx.ft < 0 ||
      idx.ft >= scheme_.n_fast_time || idx.ch < 0 || idx.ch >= n_ch)
    throw std::invalid_argument("forward: sample index out of range");
  if (field.amplitudes.size() != n_sc)
    throw std::invalid_argument("forward: amplitude count does not match positions");

  const double f_c = geometry_.center_frequency;
  const double c = params.speed_of_sound;
  const double lambda = c / f_c;
  const double elw = params.element_width;
  const double r0 = params.scatterer_radius;
  const double lp_a = params.lowpass_intercept;
  const double lp_b = params.lowpass_slope;
  // Absorption exponent per meter of path: (mu/20 dB) * f_c in MHz * 100 cm/m.
  const double q_mu = f_c * 5e-6;
  const double q_abs = params.attenuation_coeff * q_mu;

  const double tgcv = toggles_.tgc ? tgc_[idx.ft] : 1.0;
  double gamma = 1.0;
  if (toggles_.element_gain) {
    if (params.element_gain.size() != n_ch)
      throw std::invalid_argument("forward: element gain length does not match channels");
    gamma = params.element_gain[idx.ch];
  }
  const double g_total = tgcv * gamma;
  const double t0 = toggles_.time_offset ? params.initial_time_offset : 0.0;
  const double t = double(idx.ft) / geometry_.sampling_frequency + scheme_.initial_time + t0;

  const double ex_r = geometry_.element_positions(0, idx.ch);
  const WaveformBank& bank = banks_[std::size_t(idx.tx)];
  const std::vector<int>& firing = firing_[std::size_t(idx.tx)];

  // Receive-side geometry is shared by every transmit-element term.
  ws.d_rx.resize(n_sc);
  ws.sin_rx.resize(n_sc);
  ws.cos_rx.resize(n_sc);
  for (int s = 0; s < n_sc; ++s) {
    const double dx = field.positions(0, s) - ex_r;
    const double dz = field.positions(1, s);
    const double d = std::sqrt(dx * dx + dz * dz);
    if (d == 0.0) throw std::domain_error("scatterer coincides with element");
    ws.d_rx[s] = d;
    ws.sin_rx[s] = dx / d;
    ws.cos_rx[s] = dz / d;
  }

  if (kind_ == ModelKind::wavefront) {
    ws.best_el.assign(std::size_t(n_sc), -1);
    ws.d_tx_best.resize(n_sc);
    for (int s = 0; s < n_sc; ++s) {
      double best = std::numeric_limits<double>::infinity();
      for (int e : firing) {
        const double dx = field.positions(0, s) - geometry_.element_positions(0, e);
        const double dz = field.positions(1, s);
        const double d = std::sqrt(dx * dx + dz * dz);
        if (d == 0.0) throw std::domain_error("scatterer coincides with element");
        const double arrival = d / c + scheme_.delays(idx.tx, e);
        if (arrival < best) {
          best = arrival;
          ws.best_el[std::size_t(s)] = e;
          ws.d_tx_best[s] = d;
        }
      }
    }
  }

  const double w_g = weight * g_total;
  double sum = 0.0;

  auto add_term = [&](int e, int s, double d_e) {
    const double apod = scheme_.apodization(idx.tx, e);
    const double psi = scheme_.delays(idx.tx, e);
    const double a = field.amplitudes[s];
    if (!grad && a == 0.0) return;

    const double d_r = ws.d_rx[s];
    const double sin_r = ws.sin_rx[s];
    const double cos_r = ws.cos_rx[s];
    const double dx_e = field.positions(0, s) - geometry_.element_positions(0, e);
    const double sin_e = dx_e / d_e;
    const double cos_e = field.positions(1, s) / d_e;

    double b_e = 1.0, b_r = 1.0, g_arg_e = 0.0, g_arg_r = 0.0;
    double snc_e = 1.0, snc_r = 1.0;
    if (toggles_.directivity) {
      g_arg_e = elw * sin_e / lambda;
      g_arg_r = elw * sin_r / lambda;
      snc_e = sinc(g_arg_e);
      snc_r = sinc(g_arg_r);
      b_e = snc_e * cos_e;
      b_r = snc_r * cos_r;
    }

    double absorb = 1.0, d_absorb_dd = 0.0, d_absorb_dmu = 0.0;
    if (toggles_.absorption) {
      const double path = d_e + d_r;
      absorb = std::exp(-kLn10 * q_abs * path);
      d_absorb_dd = -kLn10 * q_abs * absorb;
      d_absorb_dmu = -kLn10 * q_mu * path * absorb;
    }

    double al_e = 1.0, al_r = 1.0;
    if (toggles_.spread) {
      al_e = r0 / d_e;
      al_r = r0 / d_r;
    }

    const double tau_e = d_e / c;
    const double tau_r = d_r / c;
    const double tau_sum = tau_e + tau_r;
    const double omega = toggles_.deformation ? lp_a + lp_b * tau_sum : 2.0;
    const WaveformBank::Eval wave = bank.eval(t - tau_sum - psi, omega);

    const double fac = b_e * b_r * absorb * al_e * al_r;
    sum += apod * a * fac * wave.value;
    if (!grad) return;

    grad->d_amplitudes[s] += w_g * apod * fac * wave.value;
    const double k_pre = w_g * apod * a;
    if (k_pre == 0.0) return;

    if (toggles_.time_offset) grad->d_time_offset += k_pre * fac * wave.d_time;
    if (toggles_.deformation) {
      grad->d_lowpass_intercept += k_pre * fac * wave.d_cutoff;
      grad->d_lowpass_slope += k_pre * fac * wave.d_cutoff * tau_sum;
    }
    if (toggles_.absorption)
      grad->d_attenuation += k_pre * b_e * b_r * al_e * al_r * d_absorb_dmu * wave.value;

    double dsnc_e = 0.0, dsnc_r = 0.0;
    if (toggles_.directivity) {
      dsnc_e = dsinc(g_arg_e);
      dsnc_r = dsinc(g_arg_r);
      grad->d_element_width += k_pre * absorb * al_e * al_r * wave.value *
                               (dsnc_e * (sin_e / lambda) * cos_e * b_r +
                                b_e * dsnc_r * (sin_r / lambda) * cos_r);
    }

    {
      const double d_tev_dc = (d_e + d_r) / (c * c);
      double dc = k_pre * fac * wave.d_time * d_tev_dc;
      if (toggles_.deformation) dc -= k_pre * fac * wave.d_cutoff * lp_b * d_tev_dc;
      if (toggles_.directivity)
        dc += k_pre * absorb * al_e * al_r * wave.value *
              (dsnc_e * (-g_arg_e / c) * cos_e * b_r + b_e * dsnc_r * (-g_arg_r / c) * cos_r);
      grad->d_speed += dc;
    }

    // Position partials, receive then transmit side. Radial direction is
    // (sin, cos); angle gradients follow from sin = dx/d, cos = dz/d.
    auto side = [&](double d, double sinv, double cosv, double snc, double dsnc_v,
                    double b_other) {
      double dT_dd = k_pre * b_e * b_r * al_e * al_r * d_absorb_dd * wave.value;
      if (toggles_.spread)
        dT_dd += k_pre * b_e * b_r * absorb * (-al_e * al_r / d) * wave.value;
      dT_dd += k_pre * fac * (-wave.d_time / c);
      if (toggles_.deformation) dT_dd += k_pre * fac * wave.d_cutoff * (lp_b / c);

      Eigen::Vector2d out = dT_dd * Eigen::Vector2d(sinv, cosv);
      if (toggles_.directivity) {
        const double common = k_pre * absorb * al_e * al_r * wave.value * b_other;
        const double dT_dsin = common * dsnc_v * (elw / lambda) * cosv;
        const double dT_dcos = common * snc;
        out += dT_dsin * Eigen::Vector2d(cosv * cosv / d, -sinv * cosv / d);
        out += dT_dcos * Eigen::Vector2d(-sinv * cosv / d, sinv * sinv / d);
      }
      return out;
    };
    grad->d_positions.col(s) += side(d_r, sin_r, cos_r, snc_r, dsnc_r, b_e);
    grad->d_positions.col(s) += side(d_e, sin_e, cos_e, snc_e, dsnc_e, b_r);
  };

  if (kind_ == ModelKind::full) {
    for (int e : firing) {
      const double ex_e = geometry_.element_positions(0, e);
      for (int s = 0; s < n_sc; ++s) {
        const double dx = field.positions(0, s) - ex_e;
        const double dz = field.positions(1, s);
        const double d = std::sqrt(dx * dx + dz * dz);
        if (d == 0.0) throw std::domain_error("scatterer coincides with element");
        add_term(e, s, d);
      }
    }
  } else {
    for (int s = 0; s < n_sc; ++s) add_term(ws.best_el[std::size_t(s)], s, ws.d_tx_best[s]);
  }

  if (grad && toggles_.element_gain) grad->d_element_gain[idx.ch] += weight * tgcv * sum;
  return g_total * sum;
}

double ForwardModel::predict_sample(const SampleIndex& idx, const ScattererField& field,
                                    const ModelParams& params) const {
  ForwardWorkspace ws;
  return accumulate_sample(idx, field, params, 0.0, nullptr, ws);
}

Eigen::VectorXd ForwardModel::predict_batch(std::span<const SampleIndex> batch,
                                            const ScattererField& field,
                                            const ModelParams& params) const {
  Eigen::VectorXd out(Eigen::Index(batch.size()));
  std::exception_ptr error;
#pragma omp parallel num_threads(thread_count())
  {
    ForwardWorkspace ws;
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < std::int64_t(batch.size()); ++i) {
      try {
        out[Eigen::Index(i)] = accumulate_sample(batch[std::size_t(i)], field, params,
                                                 0.0, nullptr, ws);
      } catch (...) {
#pragma omp critical
        if (!error) error = std::current_exception();
      }
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace usinv
