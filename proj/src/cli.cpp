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

#include "usinv/cli.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <zlib.h>

#include "usinv/beamform.hpp"
#include "usinv/config.hpp"
#include "usinv/io.hpp"
#include "usinv/metrics.hpp"
#include "usinv/optimizer.hpp"
#include "usinv/phantom.hpp"
#include "usinv/red.hpp"
#include "usinv/render.hpp"
#include "usinv/signal.hpp"

namespace usinv::cli {

namespace {

// ---------------------------------------------------------------------------
// Configuration schema. Unknown keys are hard errors before any compute.

const std::map<std::string, std::set<std::string>>& config_schema() {
  static const std::map<std::string, std::set<std::string>> schema = {
      {"acquisition",
       {"channels", "pitch", "element_width", "center_frequency", "sampling_frequency",
        "n_fast_time", "initial_time", "transmit_kind", "plane_angles",
        "single_elements", "delay_speed", "pulse_fractional_bandwidth",
        "pulse_rate_factor", "tgc", "tgc_slope"}},
      {"phantom",
       {"extent_x", "extent_z", "density", "amplitude_range", "reflectivity", "cysts",
        "wires", "noise_std"}},
      {"simulate",
       {"model", "speed_of_sound", "attenuation", "element_width_fraction",
        "element_gain", "time_offset", "lowpass_intercept", "lowpass_slope"}},
      {"solver",
       {"grid", "extent_x", "extent_z", "batch_size", "iterations", "lr_amplitude",
        "lr_position", "lr_physics", "beta1", "beta2", "epsilon", "model",
        "warmup_iterations", "freeze_amplitudes", "freeze_positions", "freeze_physics",
        "box_x", "box_z", "speed_range", "init_amplitude", "init_speed",
        "init_attenuation", "init_elw_fraction", "init_element_gain",
        "init_time_offset", "init_lowpass_intercept", "init_lowpass_slope",
        "holdout_interval", "holdout_size", "checkpoint_interval", "checkpoint_path",
        "toggle_directivity", "toggle_element_gain", "toggle_spread",
        "toggle_absorption", "toggle_deformation", "toggle_time_offset",
        "toggle_tgc"}},
      {"image",
       {"nx", "nz", "extent_x", "extent_z", "dynamic_range", "kde_radius_wavelengths",
        "kde_weighted", "speed_of_sound"}},
      {"beamform",
       {"f_number", "window", "lens_delay", "mv_subaperture", "mv_loading",
        "filter_order", "compound"}},
      {"red",
       {"mu", "beta", "epsilon", "h", "max_outer", "patch", "window",
        "cg_max_iterations", "cg_tolerance"}},
      {"metrics", {"bins"}},
  };
  return schema;
}

Config load_config(const std::string& path) {
  Config config = path.empty() ? Config() : Config::from_file(path);
  config.check_known(config_schema());
  return config;
}

// ---------------------------------------------------------------------------
// Builders from configuration.

Waveform make_pulse(double f_c, double fractional_bandwidth, double rate_factor) {
  const double rate = rate_factor * f_c;
  const double sigma_f =
      fractional_bandwidth * f_c / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  const double sigma_t = 1.0 / (2.0 * std::numbers::pi * sigma_f);
  const int half = int(std::ceil(4.0 * sigma_t * rate));

  Waveform pulse;
  pulse.samples.resize(2 * half + 1);
  pulse.sample_rate = rate;
  pulse.start_time = -double(half) / rate;
  for (int i = -half; i <= half; ++i) {
    const double t = i / rate;
    pulse.samples[i + half] =
        std::cos(2.0 * std::numbers::pi * f_c * t) * std::exp(-t * t / (2.0 * sigma_t * sigma_t));
  }
  return pulse;
}

Acquisition build_acquisition(const Config& config) {
  Acquisition acq;
  const int n_ch = config.get_int("acquisition", "channels", 32);
  const double pitch = config.get_double("acquisition", "pitch", 3e-4);
  if (n_ch < 1 || !(pitch > 0.0))
    throw std::invalid_argument("config: channels and pitch must be positive");

  acq.geometry.element_positions.resize(2, n_ch);
  for (int e = 0; e < n_ch; ++e) {
    acq.geometry.element_positions(0, e) = (e - 0.5 * (n_ch - 1)) * pitch;
    acq.geometry.element_positions(1, e) = 0.0;
  }
  acq.geometry.element_width_nominal =
      config.get_double("acquisition", "element_width", 0.9 * pitch);
  acq.geometry.center_frequency =
      config.get_double("acquisition", "center_frequency", 5e6);
  acq.geometry.sampling_frequency =
      config.get_double("acquisition", "sampling_frequency", 20e6);

  TransmitScheme& scheme = acq.scheme;
  scheme.initial_time = config.get_double("acquisition", "initial_time", 2e-6);
  scheme.n_fast_time = config.get_int("acquisition", "n_fast_time", 512);

  const std::string kind = config.get_string("acquisition", "transmit_kind", "plane");
  const double c_delay = config.get_double("acquisition", "delay_speed", 1540.0);
  if (kind == "plane") {
    const std::vector<double> angles_deg =
        config.get_doubles("acquisition", "plane_angles", {0.0});
    const int n_tx = int(angles_deg.size());
    scheme.delays.resize(n_tx, n_ch);
    scheme.apodization = Eigen::MatrixXd::Ones(n_tx, n_ch);
    for (int tx = 0; tx < n_tx; ++tx) {
      const double sin_a = std::sin(angles_deg[std::size_t(tx)] * std::numbers::pi / 180.0);
      for (int e = 0; e < n_ch; ++e)
        scheme.delays(tx, e) = acq.geometry.element_positions(0, e) * sin_a / c_delay;
      scheme.delays.row(tx).array() -= scheme.delays.row(tx).minCoeff();
    }
  } else if (kind == "single") {
    const std::vector<double> elements =
        config.get_doubles("acquisition", "single_elements", {0.5 * (n_ch - 1)});
    const int n_tx = int(elements.size());
    scheme.delays = Eigen::MatrixXd::Zero(n_tx, n_ch);
    scheme.apodization = Eigen::MatrixXd::Zero(n_tx, n_ch);
    for (int tx = 0; tx < n_tx; ++tx) {
      const int e = int(std::lround(elements[std::size_t(tx)]));
      if (e < 0 || e >= n_ch)
        throw std::invalid_argument("config: single_elements index out of range");
      scheme.apodization(tx, e) = 1.0;
    }
  } else {
    throw std::invalid_argument("config: transmit_kind must be plane or single");
  }

  const Waveform pulse = make_pulse(
      acq.geometry.center_frequency,
      config.get_double("acquisition", "pulse_fractional_bandwidth", 0.6),
      config.get_double("acquisition", "pulse_rate_factor", 16.0));
  scheme.waveforms.assign(std::size_t(scheme.num_transmits()), pulse);

  acq.data = RFDataCube::zeros(int(scheme.num_transmits()), scheme.n_fast_time, n_ch);
  const std::string tgc_kind = config.get_string("acquisition", "tgc", "unit");
  const double slope = config.get_double("acquisition", "tgc_slope", 0.0);
  for (int ft = 0; ft < scheme.n_fast_time; ++ft) {
    double g = 1.0;
    if (tgc_kind == "linear")
      g = 1.0 + slope * ft;
    else if (tgc_kind == "exp")
      g = std::exp(slope * ft);
    else if (tgc_kind != "unit")
      throw std::invalid_argument("config: tgc must be unit, linear, or exp");
    if (!(g > 0.0)) throw std::invalid_argument("config: tgc curve not positive");
    acq.data.tgc_curve[ft] = g;
  }
  return acq;
}

ModelParams build_sim_params(const Config& config, const TransducerGeometry& geometry) {
  ModelParams params;
  params.speed_of_sound = config.get_double("simulate", "speed_of_sound", 1540.0);
  params.attenuation_coeff = config.get_double("simulate", "attenuation", 0.5);
  params.element_width =
      config.get_double("simulate", "element_width_fraction", 0.5) *
      geometry.element_width_nominal;
  params.element_gain.setConstant(
      geometry.num_channels(), config.get_double("simulate", "element_gain", 0.75));
  params.initial_time_offset = config.get_double("simulate", "time_offset", 0.0);
  params.lowpass_intercept = config.get_double("simulate", "lowpass_intercept", 1.0);
  params.lowpass_slope = config.get_double("simulate", "lowpass_slope", 0.0);
  return params;
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "full") return ModelKind::full;
  if (name == "wavefront") return ModelKind::wavefront;
  throw std::invalid_argument("config: model must be full or wavefront");
}

SolverConfig build_solver_config(const Config& config, const Acquisition& acq,
                                 std::uint64_t seed) {
  SolverConfig sc;
  const std::vector<double> grid = config.get_doubles("solver", "grid", {64.0, 64.0});
  if (grid.size() != 2) throw std::invalid_argument("config: solver.grid needs nx nz");
  sc.grid_nx = int(grid[0]);
  sc.grid_nz = int(grid[1]);

  const std::vector<double> speed_range =
      config.get_doubles("solver", "speed_range", {1400.0, 1600.0});
  if (speed_range.size() != 2)
    throw std::invalid_argument("config: solver.speed_range needs lo hi");
  sc.speed_lo = speed_range[0];
  sc.speed_hi = speed_range[1];

  const double c_mid = 0.5 * (sc.speed_lo + sc.speed_hi);
  const double aperture_lo = acq.geometry.element_positions.row(0).minCoeff();
  const double aperture_hi = acq.geometry.element_positions.row(0).maxCoeff();
  const double z_rec_lo = std::max(1e-3, 0.5 * c_mid * acq.scheme.initial_time);
  const double z_rec_hi =
      0.5 * c_mid *
      (acq.scheme.initial_time +
       acq.scheme.n_fast_time / acq.geometry.sampling_frequency);

  const std::vector<double> ex =
      config.get_doubles("solver", "extent_x", {aperture_lo, aperture_hi});
  const std::vector<double> ez =
      config.get_doubles("solver", "extent_z", {z_rec_lo, z_rec_hi});
  if (ex.size() != 2 || ez.size() != 2)
    throw std::invalid_argument("config: solver extents need lo hi");
  sc.extent_x_lo = ex[0];
  sc.extent_x_hi = ex[1];
  sc.extent_z_lo = ez[0];
  sc.extent_z_hi = ez[1];

  sc.batch_size = config.get_int("solver", "batch_size", 4096);
  sc.iterations = config.get_int("solver", "iterations", 30000);
  sc.lr_amplitude = config.get_double("solver", "lr_amplitude", 1e-2);
  sc.lr_position = config.get_double("solver", "lr_position", 1e-2);
  sc.lr_physics = config.get_double("solver", "lr_physics", 1e-3);
  sc.beta1 = config.get_double("solver", "beta1", 0.9);
  sc.beta2 = config.get_double("solver", "beta2", 0.999);
  sc.epsilon = config.get_double("solver", "epsilon", 1e-8);
  sc.seed = seed;
  sc.model_kind = parse_model_kind(config.get_string("solver", "model", "wavefront"));
  sc.warmup_iterations = config.get_int("solver", "warmup_iterations", 500);
  sc.freeze_amplitudes = config.get_bool("solver", "freeze_amplitudes", false);
  sc.freeze_positions = config.get_bool("solver", "freeze_positions", false);
  sc.freeze_physics = config.get_bool("solver", "freeze_physics", false);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::vector<double> bx = config.get_doubles("solver", "box_x", {nan, nan});
  const std::vector<double> bz = config.get_doubles("solver", "box_z", {nan, nan});
  if (bx.size() != 2 || bz.size() != 2)
    throw std::invalid_argument("config: solver boxes need lo hi");
  sc.box_x_lo = bx[0];
  sc.box_x_hi = bx[1];
  sc.box_z_lo = bz[0];
  sc.box_z_hi = bz[1];

  sc.init_amplitude = config.get_double("solver", "init_amplitude", 0.0);
  sc.init_speed = config.get_double("solver", "init_speed", -1.0);
  sc.init_attenuation = config.get_double("solver", "init_attenuation", 0.5);
  sc.init_elw_fraction = config.get_double("solver", "init_elw_fraction", 0.5);
  sc.init_element_gain = config.get_double("solver", "init_element_gain", 0.75);
  sc.init_time_offset = config.get_double("solver", "init_time_offset", 0.0);
  sc.init_lowpass_intercept =
      config.get_double("solver", "init_lowpass_intercept", 1.0);
  sc.init_lowpass_slope = config.get_double("solver", "init_lowpass_slope", 1e-3);

  sc.holdout_interval = config.get_int("solver", "holdout_interval", 100);
  sc.holdout_size = config.get_int("solver", "holdout_size", 0);
  sc.checkpoint_interval = config.get_int("solver", "checkpoint_interval", 0);
  sc.checkpoint_path = config.get_string("solver", "checkpoint_path", "");

  sc.toggles.directivity = config.get_bool("solver", "toggle_directivity", true);
  sc.toggles.element_gain = config.get_bool("solver", "toggle_element_gain", true);
  sc.toggles.spread = config.get_bool("solver", "toggle_spread", true);
  sc.toggles.absorption = config.get_bool("solver", "toggle_absorption", true);
  sc.toggles.deformation = config.get_bool("solver", "toggle_deformation", true);
  sc.toggles.time_offset = config.get_bool("solver", "toggle_time_offset", true);
  sc.toggles.tgc = config.get_bool("solver", "toggle_tgc", true);
  return sc;
}

PixelGrid build_pixel_grid(const Config& config, const Acquisition& acq, double c) {
  const double lambda = acq.geometry.wavelength(c);
  const double aperture_lo = acq.geometry.element_positions.row(0).minCoeff();
  const double aperture_hi = acq.geometry.element_positions.row(0).maxCoeff();
  const double z_rec_lo = std::max(1e-3, 0.5 * c * acq.scheme.initial_time);
  const double z_rec_hi =
      0.5 * c *
      (acq.scheme.initial_time +
       acq.scheme.n_fast_time / acq.geometry.sampling_frequency);

  const std::vector<double> ex =
      config.get_doubles("image", "extent_x", {aperture_lo, aperture_hi});
  const std::vector<double> ez =
      config.get_doubles("image", "extent_z", {z_rec_lo, z_rec_hi});
  if (ex.size() != 2 || ez.size() != 2 || !(ex[1] > ex[0]) || !(ez[1] > ez[0]))
    throw std::invalid_argument("config: image extents need lo hi");

  PixelGrid grid;
  grid.nx = config.get_int("image", "nx", 0);
  grid.nz = config.get_int("image", "nz", 0);
  if (grid.nx <= 0) grid.nx = std::max(2, int(std::ceil((ex[1] - ex[0]) / (lambda / 3.0))));
  if (grid.nz <= 0) grid.nz = std::max(2, int(std::ceil((ez[1] - ez[0]) / (lambda / 4.0))));
  grid.dx = (ex[1] - ex[0]) / (grid.nx - 1);
  grid.dz = (ez[1] - ez[0]) / (grid.nz - 1);
  grid.origin_x = ex[0];
  grid.origin_z = ez[0];
  grid.validate();
  return grid;
}

BeamformParams build_beamform_params(const Config& config, int n_ch) {
  BeamformParams params;
  params.f_number = config.get_double("beamform", "f_number", 0.5);
  const std::string window = config.get_string("beamform", "window", "rectangular");
  if (window == "hann")
    params.window = RxWindow::hann;
  else if (window != "rectangular")
    throw std::invalid_argument("config: window must be rectangular or hann");
  params.lens_delay = config.get_double("beamform", "lens_delay", 0.0);
  params.mv_subaperture =
      config.get_int("beamform", "mv_subaperture", std::min(30, n_ch));
  params.mv_loading = config.get_double("beamform", "mv_loading", 1e-4);
  return params;
}

RedConfig build_red_config(const Config& config) {
  RedConfig rc;
  rc.mu = config.get_double("red", "mu", 2000.0);
  rc.beta = config.get_double("red", "beta", 1000.0);
  rc.epsilon = config.get_double("red", "epsilon", 5e-4);
  rc.h = config.get_double("red", "h", 0.8);
  rc.max_outer = config.get_int("red", "max_outer", 30);
  rc.nlm_patch = config.get_int("red", "patch", 5);
  rc.nlm_window = config.get_int("red", "window", 11);
  rc.cg_max_iterations = config.get_int("red", "cg_max_iterations", 500);
  rc.cg_tolerance = config.get_double("red", "cg_tolerance", 1e-10);
  rc.validate();
  return rc;
}

PhantomSpec build_phantom_spec(const Config& config, const Acquisition& acq,
                               double speed) {
  const double aperture_lo = acq.geometry.element_positions.row(0).minCoeff();
  const double aperture_hi = acq.geometry.element_positions.row(0).maxCoeff();
  const double z_rec_lo = std::max(1e-3, 0.5 * speed * acq.scheme.initial_time);
  const double z_rec_hi =
      0.5 * speed *
      (acq.scheme.initial_time +
       acq.scheme.n_fast_time / acq.geometry.sampling_frequency);

  PhantomSpec spec;
  const std::vector<double> ex =
      config.get_doubles("phantom", "extent_x", {aperture_lo, aperture_hi});
  const std::vector<double> ez = config.get_doubles(
      "phantom", "extent_z", {z_rec_lo + 1e-3, std::max(z_rec_lo + 2e-3, 0.9 * z_rec_hi)});
  if (ex.size() != 2 || ez.size() != 2)
    throw std::invalid_argument("config: phantom extents need lo hi");
  spec.extent_x_lo = ex[0];
  spec.extent_x_hi = ex[1];
  spec.extent_z_lo = ez[0];
  spec.extent_z_hi = ez[1];
  spec.wavelength = acq.geometry.wavelength(speed);
  spec.density_per_wavelength_sq = config.get_double("phantom", "density", 3.0);
  const std::vector<double> amps =
      config.get_doubles("phantom", "amplitude_range", {0.5, 1.0});
  if (amps.size() != 2)
    throw std::invalid_argument("config: phantom.amplitude_range needs lo hi");
  spec.amplitude_lo = amps[0];
  spec.amplitude_hi = amps[1];

  const std::vector<double> cysts = config.get_doubles("phantom", "cysts", {});
  if (cysts.size() % 4 != 0)
    throw std::invalid_argument("config: phantom.cysts needs cx cz radius echo tuples");
  for (std::size_t k = 0; k < cysts.size(); k += 4) {
    PhantomRegion region;
    region.kind = PhantomRegion::Kind::cyst;
    region.center_x = cysts[k];
    region.center_z = cysts[k + 1];
    region.radius = cysts[k + 2];
    region.echogenicity = cysts[k + 3];
    spec.regions.push_back(region);
  }
  const std::vector<double> wires = config.get_doubles("phantom", "wires", {});
  if (wires.size() % 3 != 0)
    throw std::invalid_argument("config: phantom.wires needs x z amplitude triples");
  for (std::size_t k = 0; k < wires.size(); k += 3) {
    PhantomRegion region;
    region.kind = PhantomRegion::Kind::wire;
    region.center_x = wires[k];
    region.center_z = wires[k + 1];
    region.amplitude = wires[k + 2];
    spec.regions.push_back(region);
  }
  return spec;
}

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32),
                    std::uint32_t(stream), std::uint32_t(stream >> 32)};
  return std::mt19937_64(seq);
}

// ---------------------------------------------------------------------------
// Output writers.

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cli: cannot open " + path);
  out << text;
  if (!out) throw std::runtime_error("cli: failed writing " + path);
}

void write_resolved_config(const std::string& primary_output, const Config& config) {
  write_text_file(primary_output + ".resolved.cfg", config.resolved_text());
}

void append_be32(std::string& out, std::uint32_t v) {
  out.push_back(char(v >> 24));
  out.push_back(char(v >> 16));
  out.push_back(char(v >> 8));
  out.push_back(char(v));
}

void append_chunk(std::string& out, const char type[4], const std::string& data) {
  append_be32(out, std::uint32_t(data.size()));
  const std::size_t crc_start = out.size();
  out.append(type, 4);
  out += data;
  const uLong crc = ::crc32(0L, reinterpret_cast<const Bytef*>(out.data() + crc_start),
                            uInt(4 + data.size()));
  append_be32(out, std::uint32_t(crc));
}

/// 8-bit grayscale PNG of a dB image: -dynamic_range maps to black, 0 to
/// white.
void write_png(const std::string& path, const Eigen::MatrixXd& db_image,
               double dynamic_range) {
  const int h = int(db_image.rows());
  const int w = int(db_image.cols());
  if (h < 1 || w < 1) throw std::invalid_argument("cli: empty image");

  std::string raw;
  raw.reserve(std::size_t(h) * (std::size_t(w) + 1));
  for (int i = 0; i < h; ++i) {
    raw.push_back('\0');  // filter type none
    for (int j = 0; j < w; ++j) {
      const double unit = std::min(1.0, std::max(0.0, (db_image(i, j) + dynamic_range) /
                                                          dynamic_range));
      raw.push_back(char(std::lround(255.0 * unit)));
    }
  }

  uLongf bound = ::compressBound(uLong(raw.size()));
  std::string compressed(bound, '\0');
  if (::compress2(reinterpret_cast<Bytef*>(compressed.data()), &bound,
                  reinterpret_cast<const Bytef*>(raw.data()), uLong(raw.size()),
                  9) != Z_OK)
    throw std::runtime_error("cli: png compression failed");
  compressed.resize(bound);

  std::string ihdr;
  append_be32(ihdr, std::uint32_t(w));
  append_be32(ihdr, std::uint32_t(h));
  ihdr.push_back(8);   // bit depth
  ihdr.push_back(0);   // grayscale
  ihdr.push_back(0);   // compression
  ihdr.push_back(0);   // filter
  ihdr.push_back(0);   // no interlace

  std::string file("\x89PNG\r\n\x1a\n", 8);
  append_chunk(file, "IHDR", ihdr);
  append_chunk(file, "IDAT", compressed);
  append_chunk(file, "IEND", "");
  write_text_file(path, file);
}

ImageFile to_image_file(const Eigen::MatrixXd& values, const PixelGrid& grid,
                        nlohmann::json meta) {
  ImageFile image;
  image.values = values;
  image.x_axis.resize(grid.nx);
  image.z_axis.resize(grid.nz);
  for (int ix = 0; ix < grid.nx; ++ix) image.x_axis[ix] = grid.x(ix);
  for (int iz = 0; iz < grid.nz; ++iz) image.z_axis[iz] = grid.z(iz);
  image.meta = std::move(meta);
  return image;
}

void emit_report(const std::string& path, const std::vector<std::pair<std::string, std::string>>& rows) {
  std::string text;
  for (const auto& [key, value] : rows) text += key + "=" + value + "\n";
  if (path.empty())
    std::cout << text;
  else
    write_text_file(path, text);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Subcommands.

int cmd_simulate(const std::string& config_path, const std::string& out,
                 std::uint64_t seed) {
  Config config = load_config(config_path);
  Acquisition acq = build_acquisition(config);
  const ModelParams params = build_sim_params(config, acq.geometry);
  const PhantomSpec spec = build_phantom_spec(config, acq, params.speed_of_sound);

  std::vector<std::string> warnings;
  std::mt19937_64 rng_scene = make_stream(seed, 1);
  std::mt19937_64 rng_noise = make_stream(seed, 2);
  ScattererField field = gen_phantom(spec, rng_scene, &warnings);
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
  field.amplitudes *= config.get_double("phantom", "reflectivity", 5e7);

  const double noise_std = config.get_double("phantom", "noise_std", 0.0);
  const ModelKind kind =
      parse_model_kind(config.get_string("simulate", "model", "full"));
  acq.data = simulate_rf(field, params, acq.geometry, acq.scheme, acq.data.tgc_curve,
                         noise_std, rng_noise, kind);

  nlohmann::json meta;
  meta["command"] = "simulate";
  meta["seed"] = seed;
  meta["n_scatterers"] = field.size();
  meta["truth_speed_of_sound"] = params.speed_of_sound;
  write_rf_file(out, acq, meta);
  write_resolved_config(out, config);
  std::cout << "scatterers=" << field.size() << "\nsamples="
            << acq.data.total_samples() << "\nout=" << out << "\n";
  return 0;
}

int cmd_reconstruct(const std::string& config_path, const std::string& data_path,
                    const std::string& out, const std::string& image_out,
                    const std::string& png_out, std::uint64_t seed) {
  Config config = load_config(config_path);
  const Acquisition acq = read_rf_file(data_path);
  const SolverConfig solver_config = build_solver_config(config, acq, seed);

  const Solution solution = solve(acq.data, acq.geometry, acq.scheme, solver_config);
  write_solution_file(out, solution, make_reparam_spec(solver_config, acq.geometry));

  if (!image_out.empty() || !png_out.empty()) {
    const double c = solution.params.speed_of_sound;
    const PixelGrid grid = build_pixel_grid(config, acq, c);
    const double radius = config.get_double("image", "kde_radius_wavelengths", 0.5) *
                          acq.geometry.wavelength(c);
    const bool weighted = config.get_bool("image", "kde_weighted", true);
    const double dynamic_range = config.get_double("image", "dynamic_range", 60.0);
    const Eigen::MatrixXd kde = kde_image(solution.field, grid, radius, weighted);
    const Eigen::MatrixXd db = log_compress(kde, dynamic_range);
    if (!image_out.empty()) {
      nlohmann::json meta;
      meta["kind"] = "kde_db";
      meta["dynamic_range"] = dynamic_range;
      write_image_file(image_out, to_image_file(db, grid, meta));
    }
    if (!png_out.empty()) write_png(png_out, db, dynamic_range);
  }

  write_resolved_config(out, config);
  std::vector<std::pair<std::string, std::string>> report;
  report.emplace_back("speed_of_sound", format_double(solution.params.speed_of_sound));
  report.emplace_back("attenuation", format_double(solution.params.attenuation_coeff));
  report.emplace_back("element_width", format_double(solution.params.element_width));
  report.emplace_back("time_offset", format_double(solution.params.initial_time_offset));
  report.emplace_back(
      "final_loss",
      format_double(solution.loss_trace[solution.loss_trace.size() - 1]));
  report.emplace_back("wall_seconds", format_double(solution.wall_seconds));
  emit_report("", report);
  return 0;
}

BeamformMethod parse_method(const std::string& name) {
  if (name == "das") return BeamformMethod::das;
  if (name == "mv") return BeamformMethod::mv;
  if (name == "dmas") return BeamformMethod::dmas;
  throw std::invalid_argument("cli: method must be das, mv, or dmas");
}

int cmd_beamform(const std::string& config_path, const std::string& data_path,
                 const std::string& method_name, const std::string& image_out,
                 const std::string& png_out) {
  Config config = load_config(config_path);
  const Acquisition acq = read_rf_file(data_path);
  const double c = config.get_double("image", "speed_of_sound", 1540.0);

  const Waveform& pulse = acq.scheme.waveforms.at(0);
  const double bandwidth = band_minus6db(pulse.samples, pulse.sample_rate).width();
  const int order = config.get_int("beamform", "filter_order", 5);
  const IQCube iq = iq_demodulate(acq.data, acq.geometry.center_frequency,
                                  acq.geometry.sampling_frequency, order, bandwidth);

  const PixelGrid grid = build_pixel_grid(config, acq, c);
  const BeamformParams params =
      build_beamform_params(config, int(acq.geometry.num_channels()));
  const std::vector<Eigen::MatrixXcd> images = beamform_image(
      iq, grid, acq.geometry, acq.scheme, c, parse_method(method_name), params);

  const std::string compound = config.get_string("beamform", "compound", "coherent");
  if (compound != "coherent" && compound != "incoherent")
    throw std::invalid_argument("config: compound must be coherent or incoherent");
  const double dynamic_range = config.get_double("image", "dynamic_range", 60.0);
  const Eigen::MatrixXd db =
      compound_and_compress(images, dynamic_range, compound == "coherent");

  nlohmann::json meta;
  meta["kind"] = "beamform_db";
  meta["method"] = method_name;
  meta["dynamic_range"] = dynamic_range;
  if (!image_out.empty()) write_image_file(image_out, to_image_file(db, grid, meta));
  if (!png_out.empty()) write_png(png_out, db, dynamic_range);
  write_resolved_config(image_out.empty() ? png_out : image_out, config);
  return 0;
}

int cmd_red(const std::string& config_path, const std::string& data_path,
            const std::string& image_out, const std::string& png_out) {
  Config config = load_config(config_path);
  const Acquisition acq = read_rf_file(data_path);
  const double c = config.get_double("image", "speed_of_sound", 1540.0);
  const PixelGrid grid = build_pixel_grid(config, acq, c);
  const RedConfig red_config = build_red_config(config);

  std::vector<Eigen::MatrixXd> per_transmit;
  for (int tx = 0; tx < acq.data.n_tx; ++tx) {
    const SparseTofMatrix phi =
        build_phi(grid, acq.geometry, acq.scheme, c, acq.geometry.sampling_frequency, tx);
    Eigen::VectorXd y(phi.rows);
    for (int ft = 0; ft < acq.data.n_ft; ++ft)
      for (int ch = 0; ch < acq.data.n_ch; ++ch)
        y[std::int64_t(ft) * acq.data.n_ch + ch] = double(acq.data.at(tx, ft, ch));
    const Eigen::VectorXd x = red_solve(y, phi, grid, red_config);
    Eigen::MatrixXd img(grid.nz, grid.nx);
    for (int iz = 0; iz < grid.nz; ++iz)
      for (int ix = 0; ix < grid.nx; ++ix) img(iz, ix) = x[iz * grid.nx + ix];
    per_transmit.push_back(std::move(img));
  }

  const double dynamic_range = config.get_double("image", "dynamic_range", 60.0);
  const Eigen::MatrixXd db =
      log_compress(red_compound(per_transmit).cwiseAbs(), dynamic_range);

  nlohmann::json meta;
  meta["kind"] = "red_db";
  meta["dynamic_range"] = dynamic_range;
  if (!image_out.empty()) write_image_file(image_out, to_image_file(db, grid, meta));
  if (!png_out.empty()) write_png(png_out, db, dynamic_range);
  write_resolved_config(image_out.empty() ? png_out : image_out, config);
  return 0;
}

RegionMask parse_region(const std::string& text, const ImageFile& image) {
  double x0, z0, x1, z1;
  if (std::sscanf(text.c_str(), "%lf,%lf,%lf,%lf", &x0, &z0, &x1, &z1) != 4)
    throw std::invalid_argument("cli: region must be x0,z0,x1,z1 in meters");
  RegionMask region;
  region.mask.setConstant(image.values.rows(), image.values.cols(), false);
  for (Eigen::Index i = 0; i < image.values.rows(); ++i)
    for (Eigen::Index j = 0; j < image.values.cols(); ++j) {
      const double x = image.x_axis[j];
      const double z = image.z_axis[i];
      region.mask(i, j) = x >= x0 && x <= x1 && z >= z0 && z <= z1;
    }
  if (region.count() == 0) throw std::invalid_argument("cli: region selects no pixel");
  return region;
}

int cmd_metrics(const std::string& config_path, const std::string& observed_path,
                const std::string& predicted_path, const std::string& image_path,
                const std::string& region_a, const std::string& region_b,
                const std::string& out) {
  Config config = load_config(config_path);
  std::vector<std::pair<std::string, std::string>> report;

  if (!observed_path.empty() || !predicted_path.empty()) {
    if (observed_path.empty() || predicted_path.empty())
      throw std::invalid_argument("cli: rf_mse needs both --observed and --predicted");
    const Acquisition observed = read_rf_file(observed_path);
    const Acquisition predicted = read_rf_file(predicted_path);
    report.emplace_back("rf_mse", format_double(rf_mse(observed.data, predicted.data)));
  }

  if (!image_path.empty() || !region_a.empty() || !region_b.empty()) {
    if (image_path.empty() || region_a.empty() || region_b.empty())
      throw std::invalid_argument(
          "cli: gcnr needs --image, --region-a, and --region-b");
    const ImageFile image = read_image_file(image_path);
    const int bins = config.get_int("metrics", "bins", 256);
    const double value = gcnr(image.values, parse_region(region_a, image),
                              parse_region(region_b, image), bins);
    report.emplace_back("gcnr", format_double(value));
  }

  if (report.empty())
    throw std::invalid_argument("cli: metrics needs cubes or an image with regions");
  emit_report(out, report);
  if (!out.empty()) write_resolved_config(out, config);
  return 0;
}

int cmd_ablate(const std::string& config_path, const std::string& data_path,
               const std::string& out, std::uint64_t seed) {
  Config config = load_config(config_path);
  const Acquisition acq = read_rf_file(data_path);
  const SolverConfig base = build_solver_config(config, acq, seed);

  struct Row {
    const char* name;
    bool FeatureToggles::* member;
  };
  const Row rows[] = {
      {"None", nullptr},
      {"Element Directivity", &FeatureToggles::directivity},
      {"Element Gain", &FeatureToggles::element_gain},
      {"Attenuation from Spread", &FeatureToggles::spread},
      {"Attenuation from Absorption", &FeatureToggles::absorption},
      {"Waveform Deformation", &FeatureToggles::deformation},
      {"Initial Time Offset", &FeatureToggles::time_offset},
      {"Time Gain Compensation", &FeatureToggles::tgc},
  };

  std::vector<SampleIndex> full;
  full.reserve(acq.data.total_samples());
  for (int tx = 0; tx < acq.data.n_tx; ++tx)
    for (int ft = 0; ft < acq.data.n_ft; ++ft)
      for (int ch = 0; ch < acq.data.n_ch; ++ch) full.push_back({tx, ft, ch});

  std::vector<double> mses;
  for (const Row& row : rows) {
    SolverConfig ablated = base;
    if (row.member) ablated.toggles.*(row.member) = false;
    const Solution solution = solve(acq.data, acq.geometry, acq.scheme, ablated);

    const ForwardModel model(acq.geometry, acq.scheme, acq.data.tgc_curve,
                             ablated.model_kind, ablated.toggles);
    const Eigen::VectorXd prediction =
        model.predict_batch(full, solution.field, solution.params);
    RFDataCube predicted = RFDataCube::zeros(acq.data.n_tx, acq.data.n_ft, acq.data.n_ch);
    for (std::size_t i = 0; i < full.size(); ++i)
      predicted.samples[i] = float(prediction[Eigen::Index(i)]);
    mses.push_back(rf_mse(acq.data, predicted));
    std::cerr << "ablate: " << row.name << " mse " << mses.back() << "\n";
  }

  std::string table = "Ablated Feature\tRF MSE\tdelta MSE\n";
  for (std::size_t k = 0; k < std::size(rows); ++k) {
    char line[160];
    std::snprintf(line, sizeof line, "%s\t%.6e\t%+.6e\n", rows[k].name, mses[k],
                  mses[k] - mses[0]);
    table += line;
  }
  if (out.empty())
    std::cout << table;
  else {
    write_text_file(out, table);
    write_resolved_config(out, config);
    std::cout << table;
  }
  return 0;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Off-grid ultrasound inverse scattering and baseline beamformers"};
  app.require_subcommand(1);

  std::string config_path, data_path, out, image_out, png_out, method;
  std::string observed_path, predicted_path, image_path, region_a, region_b;
  std::uint64_t seed = 0;

  CLI::App* simulate = app.add_subcommand("simulate", "Synthesize a phantom RF cube");
  simulate->add_option("--config", config_path, "Run configuration file");
  simulate->add_option("--out", out, "Output RF container")->required();
  simulate->add_option("--seed", seed, "RNG seed");

  CLI::App* reconstruct =
      app.add_subcommand("reconstruct", "Solve the inverse scattering problem");
  reconstruct->add_option("--config", config_path, "Run configuration file");
  reconstruct->add_option("--data", data_path, "Input RF container")->required();
  reconstruct->add_option("--out", out, "Output solution container")->required();
  reconstruct->add_option("--image", image_out, "Rendered image container");
  reconstruct->add_option("--png", png_out, "Rendered PNG");
  reconstruct->add_option("--seed", seed, "RNG seed");

  CLI::App* beamform_cmd = app.add_subcommand("beamform", "Classical beamformers");
  beamform_cmd->add_option("--config", config_path, "Run configuration file");
  beamform_cmd->add_option("--data", data_path, "Input RF container")->required();
  beamform_cmd->add_option("--method", method, "das, mv, or dmas")->required();
  beamform_cmd->add_option("--image", image_out, "Output image container");
  beamform_cmd->add_option("--png", png_out, "Output PNG");

  CLI::App* red_cmd = app.add_subcommand("red", "Regularized inverse beamforming");
  red_cmd->add_option("--config", config_path, "Run configuration file");
  red_cmd->add_option("--data", data_path, "Input RF container")->required();
  red_cmd->add_option("--image", image_out, "Output image container");
  red_cmd->add_option("--png", png_out, "Output PNG");

  CLI::App* metrics_cmd = app.add_subcommand("metrics", "Quality metrics report");
  metrics_cmd->add_option("--config", config_path, "Run configuration file");
  metrics_cmd->add_option("--observed", observed_path, "Observed RF container");
  metrics_cmd->add_option("--predicted", predicted_path, "Predicted RF container");
  metrics_cmd->add_option("--image", image_path, "Image container for gcnr");
  metrics_cmd->add_option("--region-a", region_a, "x0,z0,x1,z1 in meters");
  metrics_cmd->add_option("--region-b", region_b, "x0,z0,x1,z1 in meters");
  metrics_cmd->add_option("--out", out, "Report file (default stdout)");

  CLI::App* ablate_cmd =
      app.add_subcommand("ablate", "Feature ablation study over one data set");
  ablate_cmd->add_option("--config", config_path, "Run configuration file");
  ablate_cmd->add_option("--data", data_path, "Input RF container")->required();
  ablate_cmd->add_option("--out", out, "Table file (default stdout)");
  ablate_cmd->add_option("--seed", seed, "RNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 64;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(config_path, out, seed);
    if (reconstruct->parsed())
      return cmd_reconstruct(config_path, data_path, out, image_out, png_out, seed);
    if (beamform_cmd->parsed())
      return cmd_beamform(config_path, data_path, method, image_out, png_out);
    if (red_cmd->parsed()) return cmd_red(config_path, data_path, image_out, png_out);
    if (metrics_cmd->parsed())
      return cmd_metrics(config_path, observed_path, predicted_path, image_path,
                         region_a, region_b, out);
    if (ablate_cmd->parsed()) return cmd_ablate(config_path, data_path, out, seed);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace usinv::cli
