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

#include "usinv/signal.hpp"

#include <cmath>
#include <mutex>
#include <stdexcept>

#include <fftw3.h>

namespace usinv {

namespace {

// FFTW planning is not thread-safe; execution on distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

Dft::Dft(int n) : n_(n) {
  if (n < 1) throw std::invalid_argument("dft: length must be positive");
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_complex* buf = fftw_alloc_complex(std::size_t(n));
  if (!buf) throw std::runtime_error("dft: allocation failed");
  buf_ = buf;
  fwd_ = fftw_plan_dft_1d(n, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  inv_ = fftw_plan_dft_1d(n, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
}

Dft::~Dft() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (fwd_) fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  if (inv_) fftw_destroy_plan(static_cast<fftw_plan>(inv_));
  if (buf_) fftw_free(static_cast<fftw_complex*>(buf_));
}

Eigen::VectorXcd Dft::run(const Eigen::VectorXcd& x, void* plan, double scale) {
  if (int(x.size()) != n_) throw std::invalid_argument("dft: length mismatch");
  auto* buf = static_cast<fftw_complex*>(buf_);
  for (int i = 0; i < n_; ++i) {
    buf[i][0] = x[i].real();
    buf[i][1] = x[i].imag();
  }
  fftw_execute(static_cast<fftw_plan>(plan));
  Eigen::VectorXcd out(n_);
  for (int i = 0; i < n_; ++i) out[i] = scale * std::complex<double>(buf[i][0], buf[i][1]);
  return out;
}

Eigen::VectorXcd Dft::forward(const Eigen::VectorXcd& x) { return run(x, fwd_, 1.0); }

Eigen::VectorXcd Dft::inverse(const Eigen::VectorXcd& x) {
  return run(x, inv_, 1.0 / double(n_));
}

Eigen::VectorXcd analytic_signal(const Eigen::VectorXd& x) {
  const int n = int(x.size());
  if (n == 0) return {};
  Dft dft(n);
  Eigen::VectorXcd spectrum = dft.forward(x.cast<std::complex<double>>());
  // Keep DC (and Nyquist for even n), double strictly positive frequencies,
  // zero the negative half.
  const int half = n / 2;
  for (int k = 1; k < (n + 1) / 2; ++k) spectrum[k] *= 2.0;
  for (int k = half + 1; k < n; ++k) spectrum[k] = 0.0;
  return dft.inverse(spectrum);
}

Eigen::VectorXcd butterworth_lowpass(const Eigen::VectorXcd& x, double sample_rate,
                                     double cutoff_hz, int order) {
  if (!(sample_rate > 0.0) || !(cutoff_hz > 0.0) || order < 1)
    throw std::invalid_argument("butterworth_lowpass: bad filter parameters");
  const int n = int(x.size());
  if (n == 0) return {};
  Dft dft(n);
  Eigen::VectorXcd spectrum = dft.forward(x);
  for (int k = 0; k < n; ++k) {
    const double f = (k <= n / 2 ? double(k) : double(k - n)) * sample_rate / n;
    spectrum[k] /= std::sqrt(1.0 + std::pow(std::abs(f) / cutoff_hz, 2.0 * order));
  }
  return dft.inverse(spectrum);
}

Eigen::VectorXd design_lowpass_fir(double normalized_cutoff, int half_length) {
  if (!(normalized_cutoff > 0.0) || normalized_cutoff >= 1.0)
    throw std::invalid_argument("design_lowpass_fir: cutoff must be in (0, 1)");
  if (half_length < 1) throw std::invalid_argument("design_lowpass_fir: length too short");
  const int n = 2 * half_length + 1;
  Eigen::VectorXd h(n);
  for (int i = 0; i < n; ++i) {
    const int m = i - half_length;
    const double arg = M_PI * normalized_cutoff * m;
    const double s = m == 0 ? normalized_cutoff : std::sin(arg) / (M_PI * m);
    const double window = 0.54 - 0.46 * std::cos(2.0 * M_PI * i / (n - 1));
    h[i] = s * window;
  }
  h /= h.sum();
  return h;
}

Eigen::VectorXd convolve_same(const Eigen::VectorXd& x, const Eigen::VectorXd& kernel) {
  const int n = int(x.size());
  const int m = int(kernel.size());
  if (m % 2 == 0) throw std::invalid_argument("convolve_same: kernel length must be odd");
  const int half = m / 2;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    const int lo = std::max(-half, i - n + 1);
    const int hi = std::min(half, i);
    for (int k = lo; k <= hi; ++k) acc += kernel[half + k] * x[i - k];
    y[i] = acc;
  }
  return y;
}

Band band_minus6db(const Eigen::VectorXd& samples, double sample_rate) {
  const int n = int(samples.size());
  if (n < 2 || !(sample_rate > 0.0))
    throw std::invalid_argument("band_minus6db: degenerate input");

  // Zero-pad for frequency resolution well below any realistic bandwidth.
  int m = 1;
  while (m < 8 * n) m *= 2;
  Eigen::VectorXcd padded = Eigen::VectorXcd::Zero(m);
  padded.head(n) = samples.cast<std::complex<double>>();
  Dft dft(m);
  const Eigen::VectorXcd spectrum = dft.forward(padded);

  const int half = m / 2;
  Eigen::VectorXd mag(half + 1);
  for (int k = 0; k <= half; ++k) mag[k] = std::abs(spectrum[k]);
  Eigen::Index peak = 0;
  const double peak_mag = mag.maxCoeff(&peak);
  if (peak_mag == 0.0) throw std::invalid_argument("band_minus6db: zero signal");
  const double target = 0.5 * peak_mag;

  auto cross = [&](int from, int step) {
    int k = from;
    while (k + step >= 0 && k + step <= half && mag[k + step] >= target) k += step;
    const int next = k + step;
    if (next < 0 || next > half) return double(k);
    // Linear interpolation between the last bin above and first below.
    const double frac = (mag[k] - target) / (mag[k] - mag[next]);
    return double(k) + frac * step;
  };

  Band band;
  band.lo = cross(int(peak), -1) * sample_rate / m;
  band.hi = cross(int(peak), +1) * sample_rate / m;
  return band;
}

}  // namespace usinv
