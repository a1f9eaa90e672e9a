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


#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "spdmm/engine.h"
#include "spdmm/oracle.h"
#include "test_models.h"

namespace spdmm::oracle {
namespace {

ProbDist random_dist(std::mt19937_64& gen, std::size_t n, double zero_rate) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> raw(n);
  for (auto& x : raw) x = u(gen) < zero_rate ? 0.0 : u(gen);
  raw[gen() % n] += 0.1;
  return normalize(raw);
}

TEST(InducedStepTest, Examples) {
  const ProbDist a = induced_step_dist(ProbDist({0.5, 0.5}), ProbDist({0.9, 0.1}));
  EXPECT_NEAR(a[0], 0.9, 1e-15);
  EXPECT_NEAR(a[1], 0.1, 1e-15);
  const ProbDist q({0.2, 0.3, 0.5});
  EXPECT_EQ(induced_step_dist(q, q), q);
  const ProbDist c = induced_step_dist(ProbDist({1.0, 0.0}), ProbDist({0.0, 1.0}));
  EXPECT_EQ(c[0], 0.0);
  EXPECT_EQ(c[1], 1.0);
}

TEST(InducedStepTest, EqualsTargetOnRandomPairs) {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + gen() % 15;
    const ProbDist p = random_dist(gen, n, 0.2);
    const ProbDist q = random_dist(gen, n, 0.2);
    const ProbDist induced = induced_step_dist(p, q);
    for (std::size_t x = 0; x < n; ++x) ASSERT_NEAR(induced[static_cast<TokenId>(x)], q[static_cast<TokenId>(x)], 1e-12);
  }
}

TEST(EnumerateArTest, SingleStepIsNextDist) {
  std::mt19937_64 gen(22);
  const auto lm = spdmm::testing::random_ngram(gen, 4, 2, 0.3);
  const auto target = make_target(lm);
  const MultimodalPrompt prompt({}, {1});
  const SeqDist d = enumerate_autoregressive(target, prompt, 1, false);
  const ProbDist q = target_dist(target, prompt, {});
  ASSERT_EQ(d.size(), 4u);
  for (TokenId x = 0; x < 4; ++x) EXPECT_EQ(d.at({x}), q[x]);
}

TEST(EnumerateArTest, UniformPairs) {
  const Vocab vocab(2, 1);
  auto lm = std::make_shared<NgramLm>(vocab, 1, 1.0);
  const SeqDist d = enumerate_autoregressive(make_target(lm), MultimodalPrompt({}, {0}), 2, false);
  ASSERT_EQ(d.size(), 4u);
  for (const auto& [seq, m] : d) EXPECT_DOUBLE_EQ(m, 0.25);
}

TEST(EnumerateArTest, EosTerminatesBranches) {
  const Vocab vocab(2, 1);
  auto lm = std::make_shared<NgramLm>(vocab, 1, 1.0);
  const SeqDist d = enumerate_autoregressive(make_target(lm), MultimodalPrompt({}, {0}), 3, true);
  // {1}, {0,1}, {0,0,1}, {0,0,0}
  ASSERT_EQ(d.size(), 4u);
  EXPECT_DOUBLE_EQ(d.at({1}), 0.5);
  EXPECT_DOUBLE_EQ(d.at({0, 1}), 0.25);
  EXPECT_DOUBLE_EQ(d.at({0, 0, 0}), 0.125);
}

TEST(EnumerateArTest, PointMassChain) {
  const Vocab vocab(3, 2);
  auto lm = std::make_shared<NgramLm>(vocab, 2, 1e-300);
  lm->add_count({kBeginMarker}, 0, 1.0);
  lm->add_count({0}, 1, 1.0);
  lm->add_count({1}, 0, 1.0);
  lm->add_count({2}, 0, 1.0);
  const SeqDist d = enumerate_autoregressive(make_target(lm), MultimodalPrompt({}, {1}), 3, true);
  EXPECT_NEAR(d.at({0, 1, 0}), 1.0, 1e-12);
}

TEST(EnumerateTest, TooLarge) {
  std::mt19937_64 gen(23);
  const auto lm = spdmm::testing::random_ngram(gen, 40, 1, 0.3);
  const MultimodalPrompt prompt({}, {1});
  try {
    enumerate_autoregressive(make_target(lm), prompt, 4);
    FAIL();
  } catch (const SpdError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooLarge);
  }
  EXPECT_THROW(enumerate_spd(make_target(lm), make_text_draft(lm), prompt,
                             SpdConfig{2, DecodeMode::kStochastic, 4, true}, 4),
               SpdError);
  EXPECT_THROW(enumerate_spd(make_target(lm), make_text_draft(lm), prompt,
                             SpdConfig{2, DecodeMode::kGreedy, 4, true}, 2),
               SpdError);
}

TEST(EnumerateSpdTest, IdenticalModelsMatchAutoregressive) {
  std::mt19937_64 gen(24);
  const auto lm = spdmm::testing::random_ngram(gen, 3, 2, 0.4);
  const MultimodalPrompt prompt({2}, {0});
  const SpdConfig cfg{2, DecodeMode::kStochastic, 3, true};
  const SeqDist spd = enumerate_spd(make_target(lm), make_target(lm), prompt, cfg, 3);
  const SeqDist ar = enumerate_autoregressive(make_target(lm), prompt, 3, true);
  EXPECT_LT(linf_distance(spd, ar), 1e-12);
}

TEST(EnumerateSpdTest, AgreesWithInducedStepForOneToken) {
  std::mt19937_64 gen(25);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t v = 2 + gen() % 5;
    const auto t_lm = spdmm::testing::random_ngram(gen, v, 2, 0.2);
    const auto d_lm = spdmm::testing::random_ngram(gen, v, 2, 0.2);
    const MultimodalPrompt prompt({}, spdmm::testing::random_tokens(gen, v, 2));
    const auto target = make_target(t_lm);
    const auto draft = make_text_draft(d_lm);
    const SeqDist spd =
        enumerate_spd(target, draft, prompt, SpdConfig{1, DecodeMode::kStochastic, 1, false}, 1);
    const ProbDist induced =
        induced_step_dist(draft_dist(draft, prompt, {}), target_dist(target, prompt, {}));
    for (TokenId x = 0; x < static_cast<TokenId>(v); ++x) {
      const auto it = spd.find({x});
      ASSERT_NEAR(it == spd.end() ? 0.0 : it->second, induced[x], 1e-12);
    }
  }
}

TEST(EnumerateSpdTest, LosslessVocab3Gamma3Length4) {
  std::mt19937_64 gen(26);
  for (int trial = 0; trial < 10; ++trial) {
    const auto t_lm = spdmm::testing::random_ngram(gen, 3, 2, 0.3);
    const auto d_lm = spdmm::testing::random_ngram(gen, 3, 2, 0.3);
    const MultimodalPrompt prompt({1}, {0});
    const SpdConfig cfg{3, DecodeMode::kStochastic, 4, true};
    const SeqDist spd = enumerate_spd(make_target(t_lm), make_text_draft(d_lm), prompt, cfg, 4);
    const SeqDist ar = enumerate_autoregressive(make_target(t_lm), prompt, 4, true);
    EXPECT_NEAR(total_mass(spd), 1.0, 1e-10);
    EXPECT_LT(linf_distance(spd, ar), 1e-10);
  }
}

TEST(EnumerateSpdTest, FollowsTargetNotDraft) {
  // With distinct models the SPD law must sit away from the draft's own law.
  std::mt19937_64 gen(27);
  const auto t_lm = spdmm::testing::random_ngram(gen, 3, 2, 0.3, 0.0);
  const auto d_lm = spdmm::testing::random_ngram(gen, 3, 2, 0.3, 0.0);
  const MultimodalPrompt prompt({}, {0});
  const SeqDist draft_law = enumerate_autoregressive(make_target(d_lm), prompt, 3, false);
  const SeqDist spd = enumerate_spd(make_target(t_lm), make_text_draft(d_lm), prompt,
                                    SpdConfig{2, DecodeMode::kStochastic, 3, false}, 3);
  EXPECT_GT(linf_distance(spd, draft_law), 1e-3);
}

// Ties the engine to the exact law: empirical SPD output frequencies must
// match enumerate_spd cell by cell.
TEST(EngineAgainstOracleTest, StochasticEngineMatchesExactLaw) {
  std::mt19937_64 gen(28);
  const auto t_lm = spdmm::testing::random_ngram(gen, 3, 2, 0.3);
  const auto d_lm = spdmm::testing::random_ngram(gen, 3, 1, 0.3);
  const auto target = make_target(t_lm);
  const auto draft = make_text_draft(d_lm);
  const MultimodalPrompt prompt({2}, {0, 1});
  const SpdConfig cfg{3, DecodeMode::kStochastic, 3, true};
  const SeqDist exact = enumerate_spd(target, draft, prompt, cfg, 3);

  constexpr int kRuns = 100000;
  SeqDist counts;
  for (int i = 0; i < kRuns; ++i) {
    counts[spd_generate(target, draft, prompt, cfg, SpdRng::from_seed(static_cast<std::uint64_t>(i)))
               .tokens] += 1.0;
  }
  for (const auto& [seq, m] : counts) {
    ASSERT_TRUE(exact.contains(seq)) << "engine produced an impossible sequence";
  }
  for (const auto& [seq, m] : exact) {
    const double freq = counts.contains(seq) ? counts.at(seq) / kRuns : 0.0;
    const double sigma = std::sqrt(m * (1.0 - m) / kRuns);
    EXPECT_NEAR(freq, m, 5.0 * sigma + 1e-9);
  }
}

TEST(LinfTest, UnionOfSupports) {
  const SeqDist a{{{0}, 0.5}, {{1}, 0.5}};
  const SeqDist b{{{0}, 0.5}, {{2}, 0.5}};
  EXPECT_DOUBLE_EQ(linf_distance(a, b), 0.5);
  EXPECT_DOUBLE_EQ(linf_distance(a, a), 0.0);
}

}  // namespace
}  // namespace spdmm::oracle
