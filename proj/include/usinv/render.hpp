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

#include <Eigen/Core>

#include "usinv/beamform.hpp"
#include "usinv/core.hpp"

namespace usinv {

/**
 * Gaussian kernel density image of a scatterer cloud:
 * I(p) = sum_i w_i exp(-|p - p_i|^2 / r^2), with w_i the scatterer
 * amplitude when weighting is enabled and 1 otherwise. The kernel is
 * truncated at distance 6r (a relative tail below e^-36 per scatterer);
 * a spatial hash keeps the cost near-linear in scatterers plus pixels.
 * The radius is a display parameter, free to change after solving.
 */
Eigen::MatrixXd kde_image(const ScattererField& field, const PixelGrid& grid, double r,
                          bool weight_by_amplitude = true);

}  // namespace usinv
