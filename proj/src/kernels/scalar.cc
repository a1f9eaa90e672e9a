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


#include <algorithm>
#include <array>

#include "spdmm/kernels.h"

namespace spdmm::kernels {

namespace {

inline double combine(const std::array<double, 4>& lanes) {
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

double sum_scalar(const double* x, std::size_t n) {
  std::array<double, 4> lanes{0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    lanes[i % 4] += x[i];
  }
  return combine(lanes);
}

void divide_scalar(const double* x, double denom, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = x[i] / denom;
  }
}

double residual_scalar(const double* q, const double* p, double* out,
                       std::size_t n) {
  std::array<double, 4> lanes{0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    const double d = q[i] - p[i];
    out[i] = d > 0.0 ? d : 0.0;
    lanes[i % 4] += out[i];
  }
  return combine(lanes);
}

void smooth_scalar(const double* counts, double alpha, double denom,
                   double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = (counts[i] + alpha) / denom;
  }
}

std::size_t argmax_scalar(const double* x, std::size_t n) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (x[i] > x[best]) best = i;
  }
  return best;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{sum_scalar, divide_scalar, residual_scalar,
                                 smooth_scalar, argmax_scalar};
  return table;
}

}  // namespace spdmm::kernels
