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

#include "usinv/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "usinv/container.hpp"

namespace usinv {

void SolverConfig::validate() const {
  if (grid_nx < 1 || grid_nz < 1)
    throw std::invalid_argument("solver: grid must have at least one cell");
  if (batch_size < 1) throw std::invalid_argument("solver: batch size must be at least 1");
  if (iterations < 1) throw std::invalid_argument("solver: need at least one iteration");
  if (!(lr_amplitude > 0.0) || !(lr_position > 0.0) || !(lr_physics > 0.0))
    throw std::invalid_argument("solver: learning rates must be positive");
  if (!(extent_x_hi > extent_x_lo) || !(extent_z_hi > extent_z_lo))
    throw std::invalid_argument("solver: image extent is empty");
  if (!(extent_z_lo > 0.0))
    throw std::invalid_argument("solver: image extent must sit at positive depth");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0 && epsilon > 0.0))
    throw std::invalid_argument("solver: invalid adam constants");
  if (warmup_iterations < 0) throw std::invalid_argument("solver: negative warm-up");
}

ReparamSpec make_reparam_spec(const SolverConfig& config, const TransducerGeometry& geometry) {
  ReparamSpec spec = ReparamSpec::from_geometry(geometry, config.speed_lo, config.speed_hi);
  return spec;
}

namespace {

/// Position box with NaN sides replaced by the padded-extent defaults.
struct Box {
  double x_lo, x_hi, z_lo, z_hi;
};

Box resolve_box(const SolverConfig& config, const ReparamSpec& spec) {
  const double pad = 2.0 * spec.position_scale;
  Box box;
  box.x_lo = std::isnan(config.box_x_lo) ? config.extent_x_lo - pad : config.box_x_lo;
  box.x_hi = std::isnan(config.box_x_hi) ? config.extent_x_hi + pad : config.box_x_hi;
  box.z_lo = std::isnan(config.box_z_lo) ? std::max(1e-3, config.extent_z_lo - pad)
                                         : config.box_z_lo;
  box.z_hi = std::isnan(config.box_z_hi) ? config.extent_z_hi + pad : config.box_z_hi;
  if (!(box.x_hi > box.x_lo) || !(box.z_hi > box.z_lo) || !(box.z_lo > 0.0))
    throw std::invalid_argument("solver: degenerate position box");
  return box;
}

}  // namespace

FreeVariables init_grid(const SolverConfig& config, const TransducerGeometry& geometry) {
  config.validate();
  const ReparamSpec spec = make_reparam_spec(config, geometry);
  const Box box = resolve_box(config, spec);
  if (config.extent_x_lo < box.x_lo || config.extent_x_hi > box.x_hi ||
      config.extent_z_lo < box.z_lo || config.extent_z_hi > box.z_hi)
    throw std::invalid_argument("solver: image extent leaves the position box");

  const Eigen::Index n_sc = Eigen::Index(config.grid_nx) * config.grid_nz;
  FreeVariables xi = FreeVariables::zero(n_sc, geometry.num_channels());

  const double a0 = config.init_amplitude > 0.0 ? config.init_amplitude : 1.0;
  xi.xi_amplitudes.setConstant(std::log(a0));

  const double dx = (config.extent_x_hi - config.extent_x_lo) / config.grid_nx;
  const double dz = (config.extent_z_hi - config.extent_z_lo) / config.grid_nz;
  Eigen::Index s = 0;
  for (int iz = 0; iz < config.grid_nz; ++iz)
    for (int ix = 0; ix < config.grid_nx; ++ix, ++s) {
      xi.xi_positions(0, s) = (config.extent_x_lo + (ix + 0.5) * dx) / spec.position_scale;
      xi.xi_positions(1, s) = (config.extent_z_lo + (iz + 0.5) * dz) / spec.position_scale;
    }

  // Physics initial guesses, mapped through the inverses of the transforms.
  ScattererField dummy;
  dummy.positions.resize(2, 0);
  dummy.amplitudes.resize(0);
  ModelParams init;
  init.element_width = config.init_elw_fraction * spec.element_width_nominal;
  init.speed_of_sound = config.init_speed > 0.0
                            ? config.init_speed
                            : 0.5 * (config.speed_lo + config.speed_hi);
  init.attenuation_coeff = config.init_attenuation;
  init.initial_time_offset = config.init_time_offset;
  init.element_gain =
      Eigen::VectorXd::Constant(geometry.num_channels(), config.init_element_gain);
  init.lowpass_intercept = config.init_lowpass_intercept;
  init.lowpass_slope = config.init_lowpass_slope;
  const FreeVariables phys = unconstrain(dummy, init, spec);
  xi.xi_elw = phys.xi_elw;
  xi.xi_c = phys.xi_c;
  xi.xi_mu = phys.xi_mu;
  xi.xi_t0 = phys.xi_t0;
  xi.xi_gamma = phys.xi_gamma;
  xi.xi_lp_a = phys.xi_lp_a;
  xi.xi_lp_b = phys.xi_lp_b;
  return xi;
}

std::vector<SampleIndex> sample_batch(std::mt19937_64& rng, int n_tx, int n_ft, int n_ch,
                                      int batch_size) {
  const std::int64_t cube = std::int64_t(n_tx) * n_ft * n_ch;
  if (batch_size < 1 || std::int64_t(batch_size) > cube)
    throw std::invalid_argument("sample_batch: batch size exceeds the sample cube");

  // Floyd's sampling: uniform without replacement in O(batch) memory.
  std::unordered_set<std::int64_t> seen;
  seen.reserve(std::size_t(batch_size) * 2);
  std::vector<SampleIndex> out;
  out.reserve(std::size_t(batch_size));
  auto push = [&](std::int64_t flat) {
    SampleIndex idx;
    idx.ch = int(flat % n_ch);
    idx.ft = int((flat / n_ch) % n_ft);
    idx.tx = int(flat / (std::int64_t(n_ch) * n_ft));
    out.push_back(idx);
  };
  for (std::int64_t j = cube - batch_size; j < cube; ++j) {
    std::uniform_int_distribution<std::int64_t> pick(0, j);
    const std::int64_t t = pick(rng);
    if (seen.insert(t).second) {
      push(t);
    } else {
      seen.insert(j);
      push(j);
    }
  }
  return out;
}

AdamState AdamState::zero(Eigen::Index flat_size) {
  AdamState state;
  state.m = Eigen::VectorXd::Zero(flat_size);
  state.v = Eigen::VectorXd::Zero(flat_size);
  return state;
}

void adam_step(AdamState& state, Eigen::VectorXd& flat, const Eigen::VectorXd& grad_flat,
               const SolverConfig& config, const bool active[kVarGroups],
               Eigen::Index n_sc, Eigen::Index n_ch) {
  if (flat.size() != grad_flat.size() || flat.size() != state.m.size())
    throw std::invalid_argument("adam_step: state and gradient sizes disagree");
  if (!grad_flat.allFinite()) throw std::runtime_error("divergence detected");

  const double lr[kVarGroups] = {config.lr_amplitude, config.lr_position, config.lr_physics};
  for (int g = 0; g < kVarGroups; ++g)
    if (active[g]) ++state.step[g];

  for (Eigen::Index i = 0; i < flat.size(); ++i) {
    const int g = int(group_of(i, n_sc, n_ch));
    if (!active[g]) continue;
    const double grad = grad_flat[i];
    state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * grad;
    state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * grad * grad;
    const double m_hat = state.m[i] / (1.0 - std::pow(config.beta1, double(state.step[g])));
    const double v_hat = state.v[i] / (1.0 - std::pow(config.beta2, double(state.step[g])));
    flat[i] -= lr[g] * m_hat / (std::sqrt(v_hat) + config.epsilon);
  }
}

Solution solve(const RFDataCube& observed, const TransducerGeometry& geometry,
               const TransmitScheme& scheme, const SolverConfig& config) {
  config.validate();
  {
    const auto report = validate_acquisition(geometry, scheme, observed);
    if (!report.empty()) {
      std::string msg = "solve: acquisition invalid:";
      for (const auto& m : report) msg += " " + m + ";";
      throw std::invalid_argument(msg);
    }
  }

  const auto t_begin = std::chrono::steady_clock::now();
  const ReparamSpec spec = make_reparam_spec(config, geometry);
  const Box box = resolve_box(config, spec);
  const ForwardModel model(geometry, scheme, observed.tgc_curve, config.model_kind,
                           config.toggles);
  FreeVariables xi = init_grid(config, geometry);
  const Eigen::Index n_sc = xi.n_sc();
  const Eigen::Index n_ch = xi.n_ch();

  // Independent deterministic streams for batches, holdout, calibration.
  auto make_rng = [&](std::uint64_t stream) {
    std::seed_seq seq{std::uint32_t(config.seed), std::uint32_t(config.seed >> 32),
                      std::uint32_t(stream), std::uint32_t(stream >> 32)};
    return std::mt19937_64(seq);
  };
  std::mt19937_64 rng_batches = make_rng(1);
  std::mt19937_64 rng_holdout = make_rng(2);
  std::mt19937_64 rng_probe = make_rng(3);

  const std::int64_t cube =
      std::int64_t(observed.n_tx) * observed.n_ft * observed.n_ch;
  const int batch_size = int(std::min<std::int64_t>(config.batch_size, cube));

  // Amplitude auto-calibration: scale the uniform initial amplitude so the
  // first prediction is well inside the data scale but not negligible.
  if (!(config.init_amplitude > 0.0)) {
    const int probe_size = int(std::min<std::int64_t>(4096, cube));
    const auto probe = sample_batch(rng_probe, observed.n_tx, observed.n_ft,
                                    observed.n_ch, probe_size);
    const auto [field0, params0] = constrain(xi, spec);
    const Eigen::VectorXd pred = model.predict_batch(probe, field0, params0);
    double pred_ss = 0.0, data_ss = 0.0;
    for (std::size_t i = 0; i < probe.size(); ++i) {
      pred_ss += pred[Eigen::Index(i)] * pred[Eigen::Index(i)];
      const double y = double(observed.at(probe[i].tx, probe[i].ft, probe[i].ch));
      data_ss += y * y;
    }
    if (pred_ss > 0.0 && data_ss > 0.0) {
      const double scale = 0.1 * std::sqrt(data_ss / pred_ss);
      xi.xi_amplitudes.array() += std::log(scale);
    }
  }

  const int holdout_size =
      int(std::min<std::int64_t>(config.holdout_size > 0 ? config.holdout_size : batch_size,
                                 cube));
  const auto holdout = sample_batch(rng_holdout, observed.n_tx, observed.n_ft,
                                    observed.n_ch, holdout_size);

  Eigen::VectorXd flat = xi.to_flat();
  AdamState adam = AdamState::zero(flat.size());

  Solution solution;
  solution.loss_trace.resize(config.iterations);
  const int n_holdout_evals =
      config.holdout_interval > 0 ? config.iterations / config.holdout_interval : 0;
  solution.holdout_trace.resize(n_holdout_evals);

  const bool groups_frozen[kVarGroups] = {config.freeze_amplitudes, config.freeze_positions,
                                          config.freeze_physics};
  for (int it = 0; it < config.iterations; ++it) {
    const auto batch = sample_batch(rng_batches, observed.n_tx, observed.n_ft,
                                    observed.n_ch, batch_size);
    xi = FreeVariables::from_flat(flat, n_sc, n_ch);
    double loss = 0.0;
    const GradientVector grad = batch_gradient(model, xi, spec, batch, observed, &loss);
    solution.loss_trace[it] = loss;

    const bool active[kVarGroups] = {
        !groups_frozen[0], !groups_frozen[1],
        !groups_frozen[2] && it >= config.warmup_iterations};
    adam_step(adam, flat, grad.to_flat(), config, active, n_sc, n_ch);

    // Project positions back into the box (in physical coordinates). Only
    // clamped coordinates are written back, so in-box positions are exact.
    for (Eigen::Index s = 0; s < n_sc; ++s) {
      const double px = flat[n_sc + 2 * s] * spec.position_scale;
      const double pz = flat[n_sc + 2 * s + 1] * spec.position_scale;
      const double cx = std::min(std::max(px, box.x_lo), box.x_hi);
      const double cz = std::min(std::max(pz, box.z_lo), box.z_hi);
      if (cx != px) flat[n_sc + 2 * s] = cx / spec.position_scale;
      if (cz != pz) flat[n_sc + 2 * s + 1] = cz / spec.position_scale;
    }

    if (config.holdout_interval > 0 && (it + 1) % config.holdout_interval == 0) {
      const int slot = (it + 1) / config.holdout_interval - 1;
      if (slot < n_holdout_evals) {
        xi = FreeVariables::from_flat(flat, n_sc, n_ch);
        solution.holdout_trace[slot] = batch_loss(model, xi, spec, holdout, observed);
      }
    }

    if (config.checkpoint_interval > 0 && !config.checkpoint_path.empty() &&
        (it + 1) % config.checkpoint_interval == 0) {
      Solution snapshot;
      snapshot.xi = FreeVariables::from_flat(flat, n_sc, n_ch);
      auto [f, p] = constrain(snapshot.xi, spec);
      snapshot.field = std::move(f);
      snapshot.params = std::move(p);
      snapshot.loss_trace = solution.loss_trace.head(it + 1);
      snapshot.holdout_trace = solution.holdout_trace;
      write_solution_file(config.checkpoint_path, snapshot, spec);
    }
  }

  solution.xi = FreeVariables::from_flat(flat, n_sc, n_ch);
  auto [field, params] = constrain(solution.xi, spec);
  solution.field = std::move(field);
  solution.params = std::move(params);
  solution.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
  return solution;
}

void write_solution_file(const std::string& path, const Solution& solution,
                         const ReparamSpec& spec) {
  ContainerWriter writer;
  nlohmann::json& meta = writer.meta();
  meta["kind"] = "solution";
  meta["n_sc"] = solution.xi.n_sc();
  meta["n_ch"] = solution.xi.n_ch();
  nlohmann::json js;
  js["element_width_nominal"] = spec.element_width_nominal;
  js["speed_lo"] = spec.speed_lo;
  js["speed_hi"] = spec.speed_hi;
  js["time_offset_lo"] = spec.time_offset_lo;
  js["time_offset_hi"] = spec.time_offset_hi;
  js["position_scale"] = spec.position_scale;
  js["scatterer_radius"] = spec.scatterer_radius;
  meta["reparam"] = std::move(js);

  const Eigen::VectorXd flat = solution.xi.to_flat();
  std::vector<double> buf(flat.data(), flat.data() + flat.size());
  writer.add_f64("xi", {flat.size()}, buf);
  std::vector<double> losses(solution.loss_trace.data(),
                             solution.loss_trace.data() + solution.loss_trace.size());
  writer.add_f64("loss_trace", {solution.loss_trace.size()}, losses);
  std::vector<double> holdout(solution.holdout_trace.data(),
                              solution.holdout_trace.data() + solution.holdout_trace.size());
  writer.add_f64("holdout_trace", {solution.holdout_trace.size()}, holdout);
  writer.write(path);
}

Solution read_solution_file(const std::string& path, ReparamSpec* spec_out) {
  const ContainerReader reader = ContainerReader::open(path);
  if (reader.meta().value("kind", "") != "solution")
    throw std::runtime_error("solution file: '" + path + "' is not a solution container");
  const Eigen::Index n_sc = reader.meta().at("n_sc").get<Eigen::Index>();
  const Eigen::Index n_ch = reader.meta().at("n_ch").get<Eigen::Index>();

  ReparamSpec spec;
  const nlohmann::json& js = reader.meta().at("reparam");
  spec.element_width_nominal = js.at("element_width_nominal").get<double>();
  spec.speed_lo = js.at("speed_lo").get<double>();
  spec.speed_hi = js.at("speed_hi").get<double>();
  spec.time_offset_lo = js.at("time_offset_lo").get<double>();
  spec.time_offset_hi = js.at("time_offset_hi").get<double>();
  spec.position_scale = js.at("position_scale").get<double>();
  spec.scatterer_radius = js.at("scatterer_radius").get<double>();
  if (spec_out) *spec_out = spec;

  Solution solution;
  const std::vector<double> flat = reader.read_f64("xi");
  solution.xi = FreeVariables::from_flat(
      Eigen::Map<const Eigen::VectorXd>(flat.data(), Eigen::Index(flat.size())), n_sc, n_ch);
  const std::vector<double> losses = reader.read_f64("loss_trace");
  solution.loss_trace =
      Eigen::Map<const Eigen::VectorXd>(losses.data(), Eigen::Index(losses.size()));
  const std::vector<double> holdout = reader.read_f64("holdout_trace");
  solution.holdout_trace =
      Eigen::Map<const Eigen::VectorXd>(holdout.data(), Eigen::Index(holdout.size()));
  auto [field, params] = constrain(solution.xi, spec);
  solution.field = std::move(field);
  solution.params = std::move(params);
  return solution;
}

}  // namespace usinv
