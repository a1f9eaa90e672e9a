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


#include <immintrin.h>

#include <array>

#include "spdmm/kernels.h"

namespace spdmm::kernels {

namespace {

// Loads up to four doubles, zero-filling the missing lanes. Adding +0.0 to a
// lane accumulator is exact, so the tail matches the scalar lane order.
inline __m256d load_partial(const double* x, std::size_t rem) {
  alignas(32) std::array<double, 4> buf{0.0, 0.0, 0.0, 0.0};
  for (std::size_t k = 0; k < rem; ++k) buf[k] = x[k];
  return _mm256_load_pd(buf.data());
}

inline void store_partial(double* out, __m256d v, std::size_t rem) {
  alignas(32) std::array<double, 4> buf;
  _mm256_store_pd(buf.data(), v);
  for (std::size_t k = 0; k < rem; ++k) out[k] = buf[k];
}

inline double combine(__m256d acc) {
  alignas(32) std::array<double, 4> lanes;
  _mm256_store_pd(lanes.data(), acc);
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

double sum_avx2(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  }
  if (i < n) acc = _mm256_add_pd(acc, load_partial(x + i, n - i));
  return combine(acc);
}

void divide_avx2(const double* x, double denom, double* out, std::size_t n) {
  const __m256d d = _mm256_set1_pd(denom);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_div_pd(_mm256_loadu_pd(x + i), d));
  }
  for (; i < n; ++i) out[i] = x[i] / denom;
}

double residual_avx2(const double* q, const double* p, double* out,
                     std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  __m256d acc = zero;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(q + i), _mm256_loadu_pd(p + i));
    // max_pd(d, 0) yields 0 unless d > 0, same as the scalar select.
    const __m256d r = _mm256_max_pd(d, zero);
    _mm256_storeu_pd(out + i, r);
    acc = _mm256_add_pd(acc, r);
  }
  if (i < n) {
    const std::size_t rem = n - i;
    const __m256d d = _mm256_sub_pd(load_partial(q + i, rem), load_partial(p + i, rem));
    const __m256d r = _mm256_max_pd(d, zero);
    store_partial(out + i, r, rem);
    acc = _mm256_add_pd(acc, r);
  }
  return combine(acc);
}

void smooth_avx2(const double* counts, double alpha, double denom, double* out,
                 std::size_t n) {
  const __m256d a = _mm256_set1_pd(alpha);
  const __m256d d = _mm256_set1_pd(denom);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d c = _mm256_add_pd(_mm256_loadu_pd(counts + i), a);
    _mm256_storeu_pd(out + i, _mm256_div_pd(c, d));
  }
  for (; i < n; ++i) out[i] = (counts[i] + alpha) / denom;
}

std::size_t argmax_avx2(const double* x, std::size_t n) {
  if (n < 8) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (x[i] > x[best]) best = i;
    }
    return best;
  }
  __m256d vmax = _mm256_loadu_pd(x);
  std::size_t i = 4;
  for (; i + 4 <= n; i += 4) {
    vmax = _mm256_max_pd(vmax, _mm256_loadu_pd(x + i));
  }
  alignas(32) std::array<double, 4> lanes;
  _mm256_store_pd(lanes.data(), vmax);
  double m = lanes[0];
  for (int k = 1; k < 4; ++k) m = lanes[k] > m ? lanes[k] : m;
  for (; i < n; ++i) m = x[i] > m ? x[i] : m;

  // First index holding the maximum.
  const __m256d target = _mm256_set1_pd(m);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const int mask = _mm256_movemask_pd(
        _mm256_cmp_pd(_mm256_loadu_pd(x + j), target, _CMP_EQ_OQ));
    if (mask != 0) return j + static_cast<std::size_t>(__builtin_ctz(mask));
  }
  for (; j < n; ++j) {
    if (x[j] == m) return j;
  }
  return 0;
}

}  // namespace

const KernelTable* avx2_table() {
  static const KernelTable table{sum_avx2, divide_avx2, residual_avx2,
                                 smooth_avx2, argmax_avx2};
  return cpu_has_avx2() ? &table : nullptr;
}

}  // namespace spdmm::kernels
