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
#include "usinv/forward.hpp"

using namespace usinv;

namespace {

ModelParams make_params(int n_ch, double c = 1540.0) {
  ModelParams p;
  p.speed_of_sound = c;
  p.attenuation_coeff = 0.5;
  p.element_width = 0.45 * 3e-4;
  p.element_gain = Eigen::VectorXd::Constant(n_ch, 0.75);
  p.initial_time_offset = 5e-8;
  p.lowpass_intercept = 0.6;
  p.lowpass_slope = 1e4;
  return p;
}

ScattererField make_field(std::initializer_list<std::array<double, 3>> rows) {
  ScattererField f;
  f.positions.resize(2, Eigen::Index(rows.size()));
  f.amplitudes.resize(Eigen::Index(rows.size()));
  Eigen::Index s = 0;
  for (const auto& r : rows) {
    f.positions(0, s) = r[0];
    f.positions(1, s) = r[1];
    f.amplitudes[s] = r[2];
    ++s;
  }
  return f;
}

}  // namespace

TEST_CASE("travel time is distance over speed and symmetric") {
  const Eigen::Vector2d a(1e-3, 2e-3);
  CHECK(travel_time(a, a, 1540.0) == 0.0);

  const Eigen::Vector2d o(0.0, 0.0);
  const Eigen::Vector2d p(0.0, 1.54e-3);
  CHECK(travel_time(o, p, 1540.0) == doctest::Approx(1e-6).epsilon(1e-14));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(-1e-2, 1e-2);
  for (int i = 0; i < 16; ++i) {
    const Eigen::Vector2d u(dist(rng), dist(rng));
    const Eigen::Vector2d v(dist(rng), dist(rng));
    CHECK(travel_time(u, v, 1500.0) == travel_time(v, u, 1500.0));
  }
}

TEST_CASE("directivity matches its closed form") {
  const double lambda = 3.08e-4;
  CHECK(directivity(0.0, 0.5 * lambda, lambda) == 1.0);
  CHECK(std::abs(directivity(M_PI / 2.0, lambda, lambda)) < 1e-30);
  CHECK(directivity(M_PI / 6.0, 0.5 * lambda, lambda) ==
        doctest::Approx(0.7796968012336761).epsilon(1e-13));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(-1.5, 1.5);
  for (int i = 0; i < 32; ++i) {
    const double theta = dist(rng);
    CHECK(directivity(theta, 0.7 * lambda, lambda) ==
          doctest::Approx(directivity(-theta, 0.7 * lambda, lambda)).epsilon(1e-14));
  }
}

TEST_CASE("absorption attenuation matches the decibel law") {
  CHECK(attenuation_absorption(1e-2, 3e-2, 5e6, 0.0) == 1.0);
  CHECK(attenuation_absorption(0.0, 0.0, 5e6, 0.7) == 1.0);
  CHECK(attenuation_absorption(0.012, 0.008, 5e6, 0.5) ==
        doctest::Approx(0.5623413251903491).epsilon(1e-13));

  // Strictly decreasing in total path when mu > 0.
  double prev = attenuation_absorption(0.0, 1e-3, 5e6, 0.5);
  for (int i = 2; i < 20; ++i) {
    const double cur = attenuation_absorption(0.0, i * 1e-3, 5e6, 0.5);
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("spread attenuation is the radius ratio and rejects zero distance") {
  CHECK(attenuation_spread(1e-6, 1e-6) == 1.0);
  CHECK(attenuation_spread(2e-6, 1e-6) == 0.5);
  CHECK(attenuation_spread(1e-2, 1e-6) == doctest::Approx(1e-4).epsilon(1e-14));
  CHECK_THROWS_WITH_AS(attenuation_spread(0.0, 1e-6), "scatterer coincides with element",
                       std::domain_error);
}

TEST_CASE("waveform bank keeps the base pulse verbatim and a decreasing grid") {
  const Waveform base = testutil::make_pulse(5e6);
  const WaveformBank bank(base, 8, 0.1);

  CHECK(bank.variants() == 8);
  CHECK(bank.cutoff(0) == 1.0);
  CHECK(bank.cutoff(7) == doctest::Approx(0.1).epsilon(1e-14));
  for (int k = 0; k + 1 < 8; ++k) CHECK(bank.cutoff(k) > bank.cutoff(k + 1));
  for (int k = 0; k < 8; ++k) CHECK(bank.variant(k).size() == base.samples.size());
  CHECK((bank.variant(0) - base.samples).cwiseAbs().maxCoeff() == 0.0);

  // Filtering never amplifies beyond the passband ripple of the windowed
  // kernel, and the deepest cutoff (below the pulse center frequency)
  // removes most of the band's energy.
  const double base_energy = bank.variant(0).squaredNorm();
  for (int k = 1; k < 8; ++k)
    CHECK(bank.variant(k).squaredNorm() < 1.05 * base_energy);
  CHECK(bank.variant(7).squaredNorm() < 0.5 * base_energy);
}

TEST_CASE("waveform bank evaluation interpolates in time and cutoff") {
  const Waveform base = testutil::make_pulse(5e6);
  const WaveformBank bank(base, 8, 0.1);
  const double rate = bank.sample_rate();
  const double t0 = bank.start_time();
  const int n = int(base.samples.size());

  SUBCASE("sample nodes reproduce stored values at clamped cutoff") {
    for (int i : {0, 1, n / 2, n - 2, n - 1}) {
      const auto ev = bank.eval(t0 + i / rate, 1.0);
      CHECK(ev.value == doctest::Approx(base.samples[i]).epsilon(1e-13));
      CHECK(ev.d_cutoff == 0.0);
    }
  }

  SUBCASE("midpoints are the mean of neighbors") {
    const int i = n / 2;
    const auto ev = bank.eval(t0 + (i + 0.5) / rate, 1.0);
    CHECK(ev.value ==
          doctest::Approx(0.5 * (base.samples[i] + base.samples[i + 1])).epsilon(1e-12));
  }

  SUBCASE("zero with zero partials outside the support") {
    for (double t : {t0 - 1e-9, t0 + (n - 1) / rate + 1e-9, -1.0, 1.0}) {
      const auto ev = bank.eval(t, 0.5);
      CHECK(ev.value == 0.0);
      CHECK(ev.d_time == 0.0);
      CHECK(ev.d_cutoff == 0.0);
    }
  }

  SUBCASE("cutoff grid points select single variants") {
    const double t = t0 + (n / 2 + 0.25) / rate;
    for (int k = 0; k < 8; ++k) {
      const auto ev = bank.eval(t, bank.cutoff(k));
      const Eigen::VectorXd& s = bank.variant(k);
      const int j = n / 2;
      CHECK(ev.value ==
            doctest::Approx(0.75 * s[j] + 0.25 * s[j + 1]).epsilon(1e-12));
    }
  }

  SUBCASE("between grid points the blend is linear in cutoff") {
    const double t = t0 + (n / 2 + 0.3) / rate;
    const double w_hi = bank.cutoff(2);
    const double w_lo = bank.cutoff(3);
    const double w = 0.3 * w_hi + 0.7 * w_lo;
    const double g = (w_hi - w) / (w_hi - w_lo);
    const double blended = (1.0 - g) * bank.eval(t, w_hi).value + g * bank.eval(t, w_lo).value;
    CHECK(bank.eval(t, w).value == doctest::Approx(blended).epsilon(1e-12));
  }

  SUBCASE("partials match finite differences in the interior") {
    const double t = t0 + (n / 2 + 0.37) / rate;
    const double w = 0.5 * (bank.cutoff(2) + bank.cutoff(3));
    const auto ev = bank.eval(t, w);

    const double ht = 0.02 / rate;
    const double fd_t = (bank.eval(t + ht, w).value - bank.eval(t - ht, w).value) / (2 * ht);
    CHECK(ev.d_time == doctest::Approx(fd_t).epsilon(1e-9));

    const double hw = 1e-4 * w;
    const double fd_w = (bank.eval(t, w + hw).value - bank.eval(t, w - hw).value) / (2 * hw);
    CHECK(ev.d_cutoff == doctest::Approx(fd_w).epsilon(1e-7));
  }

  SUBCASE("cutoffs beyond the grid clamp to the end variants") {
    const double t = t0 + (n / 2 + 0.4) / rate;
    const auto hi = bank.eval(t, 3.0);
    CHECK(hi.value == doctest::Approx(bank.eval(t, 1.0).value).epsilon(1e-14));
    CHECK(hi.d_cutoff == 0.0);
    const auto lo = bank.eval(t, 0.01);
    CHECK(lo.value == doctest::Approx(bank.eval(t, 0.1).value).epsilon(1e-12));
    CHECK(lo.d_cutoff == 0.0);
  }
}

TEST_CASE("waveform bank rejects degenerate construction") {
  Waveform w;
  w.sample_rate = 1e6;
  w.samples = Eigen::VectorXd::Ones(1);
  CHECK_THROWS_AS(WaveformBank(w, 8, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(WaveformBank(testutil::make_pulse(5e6), 8, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(WaveformBank(testutil::make_pulse(5e6), 0, 0.1), std::invalid_argument);
}

TEST_CASE("forward model reduces to the bare kernel with every factor off") {
  const TransducerGeometry g = testutil::make_geometry(1);
  TransmitScheme s = testutil::make_plane_scheme(g, 1, 320);
  const ForwardModel model(g, s, Eigen::VectorXd::Constant(320, 3.0), ModelKind::full,
                           FeatureToggles::all_off());

  const ScattererField field = make_field({{2e-4, 9e-3, 1.3}});
  const ModelParams params = make_params(1);

  const Eigen::Vector2d el = g.element_positions.col(0);
  const Eigen::Vector2d sc = field.positions.col(0);
  const double tau = 2.0 * travel_time(el, sc, params.speed_of_sound);

  bool any_nonzero = false;
  for (int ft = 0; ft < 320; ft += 7) {
    const double pred = model.predict_sample({0, ft, 0}, field, params);
    const double t = ft / g.sampling_frequency + s.initial_time;
    const double expected = field.amplitudes[0] * model.bank(0).eval(t - tau, 2.0).value;
    CHECK(pred == doctest::Approx(expected).epsilon(1e-13));
    if (pred != 0.0) any_nonzero = true;
  }
  CHECK(any_nonzero);
}

TEST_CASE("forward model is linear in amplitudes and superposes") {
  const TransducerGeometry g = testutil::make_geometry(8);
  const TransmitScheme s = testutil::make_plane_scheme(g, 2, 320);
  Eigen::VectorXd tgc(320);
  for (int i = 0; i < 320; ++i) tgc[i] = 1.0 + 0.01 * i;
  const ModelParams params = make_params(8);

  const ScattererField fa = make_field({{-5e-4, 8e-3, 1.0}, {3e-4, 1.05e-2, 0.7}});
  const ScattererField fb = make_field({{8e-4, 9.4e-3, 1.2}});
  const ScattererField both =
      make_field({{-5e-4, 8e-3, 1.0}, {3e-4, 1.05e-2, 0.7}, {8e-4, 9.4e-3, 1.2}});

  for (ModelKind kind : {ModelKind::full, ModelKind::wavefront}) {
    const ForwardModel model(g, s, tgc, kind);
    bool any_nonzero = false;
    for (int ft = 150; ft < 300; ft += 11)
      for (int ch : {0, 3, 7}) {
        const SampleIndex idx{1, ft, ch};
        const double pa = model.predict_sample(idx, fa, params);
        const double pb = model.predict_sample(idx, fb, params);
        const double pu = model.predict_sample(idx, both, params);
        CHECK(std::abs(pu - (pa + pb)) <= 1e-12 * (std::abs(pa) + std::abs(pb)));

        ScattererField scaled = fa;
        scaled.amplitudes *= 2.5;
        CHECK(std::abs(model.predict_sample(idx, scaled, params) - 2.5 * pa) <=
              1e-13 * std::abs(2.5 * pa));
        if (pu != 0.0) any_nonzero = true;
      }
    CHECK(any_nonzero);
  }
}

TEST_CASE("zero amplitudes predict exactly zero") {
  const TransducerGeometry g = testutil::make_geometry(4);
  const TransmitScheme s = testutil::make_plane_scheme(g, 1, 256);
  const ForwardModel model(g, s, Eigen::VectorXd::Ones(256));
  const ScattererField field = make_field({{0.0, 8e-3, 0.0}, {1e-3, 9e-3, 0.0}});
  CHECK(model.predict_sample({0, 180, 2}, field, make_params(4)) == 0.0);
}

TEST_CASE("full and wavefront models agree on single-element transmits") {
  const TransducerGeometry g = testutil::make_geometry(8);
  TransmitScheme s;
  const int n_tx = 3;
  s.delays = Eigen::MatrixXd::Zero(n_tx, 8);
  s.apodization = Eigen::MatrixXd::Zero(n_tx, 8);
  s.apodization(0, 1) = 1.0;
  s.apodization(1, 4) = 0.8;
  s.apodization(2, 7) = 1.2;
  s.initial_time = 2e-6;
  s.n_fast_time = 320;
  for (int t = 0; t < n_tx; ++t) s.waveforms.push_back(testutil::make_pulse(5e6));

  Eigen::VectorXd tgc(320);
  for (int i = 0; i < 320; ++i) tgc[i] = 1.0 + 0.005 * i;
  const ForwardModel full(g, s, tgc, ModelKind::full);
  const ForwardModel wavefront(g, s, tgc, ModelKind::wavefront);

  const ScattererField field =
      make_field({{-6e-4, 7.5e-3, 1.0}, {2e-4, 9e-3, 0.9}, {9e-4, 1.1e-2, 1.1}});
  const ModelParams params = make_params(8);

  bool any_nonzero = false;
  for (int tx = 0; tx < n_tx; ++tx)
    for (int ft = 0; ft < 320; ft += 3)
      for (int ch = 0; ch < 8; ch += 2) {
        const double pf = full.predict_sample({tx, ft, ch}, field, params);
        const double pw = wavefront.predict_sample({tx, ft, ch}, field, params);
        CHECK(std::abs(pf - pw) <= 1e-12 * std::max(std::abs(pf), 1e-300));
        if (pf != 0.0) any_nonzero = true;
      }
  CHECK(any_nonzero);
}

TEST_CASE("wavefront keeps the earliest arrival only") {
  // Two firing elements with equal delays; a scatterer much closer to
  // element 0 must be driven by element 0 alone.
  const TransducerGeometry g = testutil::make_geometry(2, 5e6, 20e6, 8e-3);
  TransmitScheme both;
  both.delays = Eigen::MatrixXd::Zero(1, 2);
  both.apodization = Eigen::MatrixXd::Ones(1, 2);
  both.initial_time = 2e-6;
  both.n_fast_time = 320;
  both.waveforms.push_back(testutil::make_pulse(5e6));

  TransmitScheme only0 = both;
  only0.apodization(0, 1) = 0.0;

  const ForwardModel two_el(g, both, Eigen::VectorXd::Ones(320), ModelKind::wavefront);
  const ForwardModel one_el(g, only0, Eigen::VectorXd::Ones(320), ModelKind::wavefront);

  // Directly above element 0, far from element 1.
  const ScattererField field = make_field({{g.element_positions(0, 0), 7e-3, 1.0}});
  const ModelParams params = make_params(2);

  bool any_nonzero = false;
  for (int ft = 120; ft < 260; ft += 5)
    for (int ch : {0, 1}) {
      const double p2 = two_el.predict_sample({0, ft, ch}, field, params);
      const double p1 = one_el.predict_sample({0, ft, ch}, field, params);
      CHECK(p2 == doctest::Approx(p1).epsilon(1e-13));
      if (p2 != 0.0) any_nonzero = true;
    }
  CHECK(any_nonzero);
}

TEST_CASE("each physics factor toggles independently") {
  const TransducerGeometry g = testutil::make_geometry(8);
  const TransmitScheme s = testutil::make_plane_scheme(g, 1, 320);
  Eigen::VectorXd tgc(320);
  for (int i = 0; i < 320; ++i) tgc[i] = 1.0 + 0.02 * i;
  const ScattererField field = make_field({{-4e-4, 8.5e-3, 1.0}});
  const ModelParams params = make_params(8);

  const ForwardModel base(g, s, tgc, ModelKind::full);
  // An off-axis sample inside the echo window where every factor deviates
  // from unity.
  const SampleIndex idx{0, 181, 6};
  const double ref = base.predict_sample(idx, field, params);
  REQUIRE(ref != 0.0);

  int which = 0;
  for (bool FeatureToggles::*flag :
       {&FeatureToggles::directivity, &FeatureToggles::element_gain,
        &FeatureToggles::spread, &FeatureToggles::absorption,
        &FeatureToggles::deformation, &FeatureToggles::time_offset, &FeatureToggles::tgc}) {
    FeatureToggles t;
    t.*flag = false;
    const ForwardModel ablated(g, s, tgc, ModelKind::full, t);
    INFO("toggle index ", which);
    CHECK(ablated.predict_sample(idx, field, params) != ref);
    ++which;
  }
}

TEST_CASE("gain curve and element gain scale predictions multiplicatively") {
  const TransducerGeometry g = testutil::make_geometry(4);
  const TransmitScheme s = testutil::make_plane_scheme(g, 1, 320);
  const ScattererField field = make_field({{2e-4, 9e-3, 1.0}});
  const SampleIndex idx{0, 193, 1};

  const ForwardModel unit(g, s, Eigen::VectorXd::Ones(320));
  const ForwardModel doubled(g, s, Eigen::VectorXd::Constant(320, 2.0));
  ModelParams params = make_params(4);
  const double ref = unit.predict_sample(idx, field, params);
  REQUIRE(ref != 0.0);
  // Scaling by powers of two is exact, so these hold bitwise.
  CHECK(doubled.predict_sample(idx, field, params) == 2.0 * ref);

  ModelParams half_gain = params;
  half_gain.element_gain[idx.ch] = 0.5 * params.element_gain[idx.ch];
  CHECK(unit.predict_sample(idx, field, half_gain) == 0.5 * ref);
}

TEST_CASE("predict_batch matches single calls and preserves order") {
  const TransducerGeometry g = testutil::make_geometry(8);
  const TransmitScheme s = testutil::make_plane_scheme(g, 2, 320);
  const ForwardModel model(g, s, Eigen::VectorXd::Ones(320));
  const ScattererField field = make_field({{-5e-4, 8e-3, 1.0}, {3e-4, 1.0e-2, 0.8}});
  const ModelParams params = make_params(8);

  std::vector<SampleIndex> batch;
  for (int ft = 140; ft < 300; ft += 13)
    for (int ch = 0; ch < 8; ch += 3) batch.push_back({ft % 2, ft, ch});

  const Eigen::VectorXd out = model.predict_batch(batch, field, params);
  REQUIRE(out.size() == Eigen::Index(batch.size()));
  for (std::size_t i = 0; i < batch.size(); ++i)
    CHECK(out[Eigen::Index(i)] == model.predict_sample(batch[i], field, params));

  std::vector<SampleIndex> reversed(batch.rbegin(), batch.rend());
  const Eigen::VectorXd rev = model.predict_batch(reversed, field, params);
  for (Eigen::Index i = 0; i < out.size(); ++i)
    CHECK(rev[out.size() - 1 - i] == out[i]);
}

TEST_CASE("forward model rejects bad construction and indices") {
  const TransducerGeometry g = testutil::make_geometry(4);
  TransmitScheme s = testutil::make_plane_scheme(g, 1, 64);
  s.apodization.setZero();
  CHECK_THROWS_WITH_AS(ForwardModel(g, s, Eigen::VectorXd::Ones(64)),
                       "forward: transmit has no firing element", std::invalid_argument);

  const TransmitScheme ok = testutil::make_plane_scheme(g, 1, 64);
  CHECK_THROWS_AS(ForwardModel(g, ok, Eigen::VectorXd::Ones(32)), std::invalid_argument);
  const ForwardModel model(g, ok, Eigen::VectorXd::Ones(64));
  const ScattererField field = make_field({{0.0, 5e-3, 1.0}});
  CHECK_THROWS_AS(model.predict_sample({0, 64, 0}, field, make_params(4)),
                  std::invalid_argument);
  CHECK_THROWS_AS(model.predict_sample({1, 0, 0}, field, make_params(4)),
                  std::invalid_argument);
  CHECK_THROWS_AS(model.predict_sample({0, 0, 4}, field, make_params(4)),
                  std::invalid_argument);

  // A scatterer exactly on an element trips the spread singularity.
  ScattererField on_element = make_field({{0.0, 0.0, 1.0}});
  on_element.positions(0, 0) = g.element_positions(0, 0);
  CHECK_THROWS_WITH_AS(model.predict_sample({0, 0, 0}, on_element, make_params(4)),
                       "scatterer coincides with element", std::domain_error);
}
