/*
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

// Dense arithmetic over probability vectors. Each kernel has a scalar
// reference and, where the CPU supports it, an AVX2 variant chosen at runtime.
//
// All variants must return bitwise-identical results. Reductions therefore
// accumulate in four interleaved lanes (element i goes to lane i % 4) and
// combine as (lane0 + lane1) + (lane2 + lane3) in every implementation.

#include <cstddef>
#include <span>
#include <string_view>

namespace spdmm::kernels {

enum class Isa { kScalar, kAvx2 };

struct KernelTable {
  double (*sum)(const double* x, std::size_t n);
  // out[i] = x[i] / denom
  void (*divide)(const double* x, double denom, double* out, std::size_t n);
  // out[i] = max(0, q[i] - p[i]); returns the lane-ordered sum of out.
  double (*residual)(const double* q, const double* p, double* out,
                     std::size_t n);
  // out[i] = (counts[i] + alpha) / denom
  void (*smooth)(const double* counts, double alpha, double denom, double* out,
                 std::size_t n);
  // Lowest index of the maximum; n >= 1.
  std::size_t (*argmax)(const double* x, std::size_t n);
};

const KernelTable& scalar_table();
// Null when the build or the CPU lacks AVX2.
const KernelTable* avx2_table();

bool cpu_has_avx2();

// Table used by the library. Defaults to the best supported ISA; the
// SPDMM_ISA=scalar environment variable forces the reference path.
const KernelTable& active();
Isa active_isa();
// Returns false if the requested ISA is not available.
bool set_active_isa(Isa isa);
std::string_view isa_name(Isa isa);

inline double sum(std::span<const double> x) { return active().sum(x.data(), x.size()); }

}  // namespace spdmm::kernels
