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


// Every SIMD kernel must agree bitwise with the scalar reference.

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "spdmm/kernels.h"

namespace spdmm::kernels {
namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

std::vector<double> random_probs(std::mt19937_64& gen, std::size_t n, bool sparse) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(n);
  double total = 0.0;
  for (auto& x : v) {
    x = sparse && u(gen) < 0.5 ? 0.0 : u(gen);
    total += x;
  }
  if (total == 0.0) v[0] = total = 1.0;
  for (auto& x : v) x /= total;
  return v;
}

class KernelEquivalence : public ::testing::Test {
 protected:
  void SetUp() override {
    simd_ = avx2_table();
    if (simd_ == nullptr) GTEST_SKIP() << "no SIMD kernels on this machine";
  }
  const KernelTable& ref_ = scalar_table();
  const KernelTable* simd_ = nullptr;
};

TEST_F(KernelEquivalence, SumMatchesBitwise) {
  std::mt19937_64 gen(1);
  for (std::size_t n = 1; n < 200; ++n) {
    const auto x = random_probs(gen, n, n % 3 == 0);
    EXPECT_TRUE(same_bits(ref_.sum(x.data(), n), simd_->sum(x.data(), n))) << "n=" << n;
  }
}

TEST_F(KernelEquivalence, DivideAndSmoothMatchBitwise) {
  std::mt19937_64 gen(2);
  for (std::size_t n = 1; n < 130; ++n) {
    auto x = random_probs(gen, n, false);
    for (auto& c : x) c = std::floor(c * 1000.0);
    std::vector<double> a(n), b(n);
    ref_.divide(x.data(), 3.7, a.data(), n);
    simd_->divide(x.data(), 3.7, b.data(), n);
    for (std::size_t i = 0; i < n; ++i) ASSERT_TRUE(same_bits(a[i], b[i]));
    const double denom = 41.0 + 0.1 * static_cast<double>(n);
    ref_.smooth(x.data(), 0.1, denom, a.data(), n);
    simd_->smooth(x.data(), 0.1, denom, b.data(), n);
    for (std::size_t i = 0; i < n; ++i) ASSERT_TRUE(same_bits(a[i], b[i]));
  }
}

TEST_F(KernelEquivalence, ResidualMatchesBitwise) {
  std::mt19937_64 gen(3);
  for (std::size_t n = 1; n < 130; ++n) {
    const auto q = random_probs(gen, n, n % 2 == 0);
    const auto p = random_probs(gen, n, n % 5 == 0);
    std::vector<double> a(n), b(n);
    const double sa = ref_.residual(q.data(), p.data(), a.data(), n);
    const double sb = simd_->residual(q.data(), p.data(), b.data(), n);
    EXPECT_TRUE(same_bits(sa, sb));
    for (std::size_t i = 0; i < n; ++i) ASSERT_TRUE(same_bits(a[i], b[i]));
  }
}

TEST_F(KernelEquivalence, ArgmaxMatchesIncludingTies) {
  std::mt19937_64 gen(4);
  for (std::size_t n = 1; n < 130; ++n) {
    auto x = random_probs(gen, n, false);
    EXPECT_EQ(ref_.argmax(x.data(), n), simd_->argmax(x.data(), n));
    // Plant a tie at two random positions.
    const std::size_t i = gen() % n, j = gen() % n;
    x[i] = x[j] = 2.0;
    EXPECT_EQ(ref_.argmax(x.data(), n), simd_->argmax(x.data(), n));
    EXPECT_EQ(ref_.argmax(x.data(), n), std::min(i, j));
  }
}

TEST(KernelReference, LaneOrderedSum) {
  const double x[5] = {1.0, 2.0, 3.0, 4.0, 5.0};
  // lanes: {1+5, 2, 3, 4} -> (6 + 2) + (3 + 4)
  EXPECT_EQ(scalar_table().sum(x, 5), 15.0);
}

TEST(KernelReference, ResidualClampsNegatives) {
  const double q[3] = {0.5, 0.2, 0.3};
  const double p[3] = {0.1, 0.6, 0.3};
  double out[3];
  const double s = scalar_table().residual(q, p, out, 3);
  EXPECT_DOUBLE_EQ(out[0], 0.4);
  EXPECT_EQ(out[1], 0.0);
  EXPECT_EQ(out[2], 0.0);
  EXPECT_DOUBLE_EQ(s, 0.4);
}

TEST(KernelDispatch, CanForceScalar) {
  const Isa before = active_isa();
  ASSERT_TRUE(set_active_isa(Isa::kScalar));
  EXPECT_EQ(&active(), &scalar_table());
  set_active_isa(before);
  if (avx2_table() == nullptr) EXPECT_FALSE(set_active_isa(Isa::kAvx2));
}

}  // namespace
}  // namespace spdmm::kernels
