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

#include <complex>

#include <Eigen/Core>

namespace usinv {

/**
 * One-dimensional complex DFT of a fixed length, wrapping FFTW plans.
 * Each instance owns its buffers; create one per thread when parallel.
 */
class Dft {
 public:
  explicit Dft(int n);
  ~Dft();
  Dft(const Dft&) = delete;
  Dft& operator=(const Dft&) = delete;

  int size() const { return n_; }
  Eigen::VectorXcd forward(const Eigen::VectorXcd& x);
  /// Inverse transform, normalized by 1/n.
  Eigen::VectorXcd inverse(const Eigen::VectorXcd& x);

 private:
  Eigen::VectorXcd run(const Eigen::VectorXcd& x, void* plan, double scale);

  int n_ = 0;
  void* buf_ = nullptr;
  void* fwd_ = nullptr;
  void* inv_ = nullptr;
};

/// Analytic signal of a real trace: negative frequencies zeroed, positive
/// doubled, DC and Nyquist kept.
Eigen::VectorXcd analytic_signal(const Eigen::VectorXd& x);

/**
 * Zero-phase low-pass: scales each frequency bin by the magnitude response
 * of an order-n Butterworth filter, |H(f)| = 1/sqrt(1 + (f/cutoff)^(2n)),
 * applied over signed baseband frequencies.
 */
Eigen::VectorXcd butterworth_lowpass(const Eigen::VectorXcd& x, double sample_rate,
                                     double cutoff_hz, int order);

/**
 * Hamming-windowed sinc low-pass of length 2·half_length+1, unit DC gain.
 * `normalized_cutoff` is the cutoff as a fraction of Nyquist, in (0, 1).
 */
Eigen::VectorXd design_lowpass_fir(double normalized_cutoff, int half_length);

/// Convolution keeping the input length, kernel centered (zero phase for
/// symmetric kernels); out-of-range input treated as zero.
Eigen::VectorXd convolve_same(const Eigen::VectorXd& x, const Eigen::VectorXd& kernel);

struct Band {
  double lo = 0.0;  // [Hz]
  double hi = 0.0;  // [Hz]
  double width() const { return hi - lo; }
};

/// -6 dB band edges around the spectral peak of a real pulse, located by
/// linear interpolation on a zero-padded magnitude spectrum.
Band band_minus6db(const Eigen::VectorXd& samples, double sample_rate);

}  // namespace usinv
