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

#include "usinv/parallel.hpp"

#include <atomic>
#include <cstdlib>

#include <omp.h>

namespace usinv {

namespace {
std::atomic<int> g_override{0};
}

int thread_count() {
  const int forced = g_override.load(std::memory_order_relaxed);
  if (forced > 0) return forced;
  if (const char* env = std::getenv("USINV_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const int n = omp_get_max_threads();
  return n >= 1 ? n : 1;
}

void set_thread_count(int n) {
  g_override.store(n > 0 ? n : 0, std::memory_order_relaxed);
}

}  // namespace usinv
