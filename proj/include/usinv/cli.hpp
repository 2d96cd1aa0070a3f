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

namespace usinv::cli {

/**
 * Entry point behind the `usinv` binary. Subcommands: simulate,
 * reconstruct, beamform, red, metrics, ablate. Returns 0 on success, 1 on
 * validation errors, 2 on numerical failures, 64 on command-line usage
 * errors. Every run writes a resolved-configuration manifest next to its
 * primary output.
 */
int run(int argc, char** argv);

}  // namespace usinv::cli
