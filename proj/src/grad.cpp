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

#include "usinv/grad.hpp"

#include <cmath>
#include <exception>
#include <stdexcept>
#include <vector>

#include <omp.h>

#include "usinv/parallel.hpp"

namespace usinv {

double batch_loss(const ForwardModel& model, const FreeVariables& xi,
                  const ReparamSpec& spec, std::span<const SampleIndex> batch,
                  const RFDataCube& observed) {
  if (batch.empty()) throw std::invalid_argument("batch_loss: batch must be non-empty");
  const auto [field, params] = constrain(xi, spec);
  const Eigen::VectorXd predicted = model.predict_batch(batch, field, params);
  double acc = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double r = predicted[Eigen::Index(i)] -
                     double(observed.at(batch[i].tx, batch[i].ft, batch[i].ch));
    acc += r * r;
  }
  return acc / double(batch.size());
}

GradientVector batch_gradient(const ForwardModel& model, const FreeVariables& xi,
                              const ReparamSpec& spec, std::span<const SampleIndex> batch,
                              const RFDataCube& observed, double* loss_out) {
  if (batch.empty()) throw std::invalid_argument("batch_gradient: batch must be non-empty");
  const auto [field, params] = constrain(xi, spec);
  const Eigen::Index n_sc = field.size();
  const Eigen::Index n_ch = model.geometry().num_channels();
  const std::int64_t n = std::int64_t(batch.size());

  const int workers = int(std::min<std::int64_t>(thread_count(), n));
  std::vector<ModelGradient> partial(std::size_t(workers), ModelGradient::zero(n_sc, n_ch));
  std::vector<double> partial_loss(std::size_t(workers), 0.0);
  std::exception_ptr error;

#pragma omp parallel num_threads(workers)
  {
    const int tid = omp_get_thread_num();
    const std::int64_t lo = tid * n / workers;
    const std::int64_t hi = (tid + 1) * n / workers;
    ForwardWorkspace ws;
    try {
      for (std::int64_t i = lo; i < hi; ++i) {
        const SampleIndex idx = batch[std::size_t(i)];
        const double y = double(observed.at(idx.tx, idx.ft, idx.ch));
        const double pred = model.accumulate_sample(idx, field, params, 0.0, nullptr, ws);
        const double residual = pred - y;
        partial_loss[std::size_t(tid)] += residual * residual;
        model.accumulate_sample(idx, field, params, 2.0 * residual / double(n),
                                &partial[std::size_t(tid)], ws);
      }
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);

  ModelGradient total = std::move(partial[0]);
  for (int t = 1; t < workers; ++t) total.add(partial[std::size_t(t)]);
  if (loss_out) {
    double acc = 0.0;
    for (double l : partial_loss) acc += l;
    *loss_out = acc / double(n);
  }
  return chain_gradient(total, xi, spec);
}

GradientVector finite_difference_gradient(
    const std::function<double(const FreeVariables&)>& loss, const FreeVariables& xi,
    double h_rel) {
  if (!(h_rel > 0.0))
    throw std::invalid_argument("finite_difference_gradient: step must be positive");
  const Eigen::Index n_sc = xi.n_sc();
  const Eigen::Index n_ch = xi.n_ch();
  Eigen::VectorXd flat = xi.to_flat();
  Eigen::VectorXd out(flat.size());
  for (Eigen::Index i = 0; i < flat.size(); ++i) {
    const double h = h_rel * std::max(1.0, std::abs(flat[i]));
    const double saved = flat[i];
    flat[i] = saved + h;
    const double up = loss(FreeVariables::from_flat(flat, n_sc, n_ch));
    flat[i] = saved - h;
    const double down = loss(FreeVariables::from_flat(flat, n_sc, n_ch));
    flat[i] = saved;
    out[i] = (up - down) / (2.0 * h);
  }
  return FreeVariables::from_flat(out, n_sc, n_ch);
}

GradientVector finite_difference_gradient(const ForwardModel& model, const FreeVariables& xi,
                                          const ReparamSpec& spec,
                                          std::span<const SampleIndex> batch,
                                          const RFDataCube& observed, double h_rel) {
  return finite_difference_gradient(
      [&](const FreeVariables& x) { return batch_loss(model, x, spec, batch, observed); },
      xi, h_rel);
}

}  // namespace usinv
