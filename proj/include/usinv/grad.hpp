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

#include <functional>
#include <span>

#include "usinv/forward.hpp"
#include "usinv/reparam.hpp"

namespace usinv {

/// Mean squared error between predicted and observed samples over a batch.
double batch_loss(const ForwardModel& model, const FreeVariables& xi,
                  const ReparamSpec& spec, std::span<const SampleIndex> batch,
                  const RFDataCube& observed);

/**
 * Exact gradient of batch_loss with respect to the free variables, by
 * hand-written adjoints chained through the reparameterization. Each sample
 * is evaluated twice: once for its residual, once accumulating partials
 * weighted by 2·residual/batch_size. Per-thread partial sums are combined
 * in thread order, so results are reproducible for a fixed worker count.
 * Optionally reports the loss of the same batch through `loss_out`.
 */
GradientVector batch_gradient(const ForwardModel& model, const FreeVariables& xi,
                              const ReparamSpec& spec, std::span<const SampleIndex> batch,
                              const RFDataCube& observed, double* loss_out = nullptr);

/// Central finite differences of an arbitrary scalar function of the free
/// variables; step per coordinate is h_rel·max(1, |xi_i|). Test oracle.
GradientVector finite_difference_gradient(
    const std::function<double(const FreeVariables&)>& loss, const FreeVariables& xi,
    double h_rel);

/// Finite differences of batch_loss itself.
GradientVector finite_difference_gradient(const ForwardModel& model, const FreeVariables& xi,
                                          const ReparamSpec& spec,
                                          std::span<const SampleIndex> batch,
                                          const RFDataCube& observed, double h_rel);

}  // namespace usinv
