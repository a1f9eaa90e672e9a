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

#include <filesystem>
#include <random>

#include "spdmm/models.h"
#include "test_models.h"

namespace spdmm {
namespace {

TEST(TrainNgramTest, BigramHandCount) {
  const Vocab vocab(2, 1);
  const auto lm = train_ngram({{0, 1, 0, 1}}, vocab, 2, 1.0);
  const TokenSeq prefix{0};
  EXPECT_EQ(lm->next_dist(prefix), ProbDist({0.25, 0.75}));
}

TEST(TrainNgramTest, UnseenContextIsUniform) {
  const Vocab vocab(4, 3);
  const auto lm = train_ngram({{0, 1, 2}}, vocab, 3, 0.5);
  const TokenSeq prefix{3, 3};
  const ProbDist d = lm->next_dist(prefix);
  for (double p : d.probs()) EXPECT_DOUBLE_EQ(p, 0.25);
}

TEST(TrainNgramTest, UnigramIgnoresPrefix) {
  const Vocab vocab(3, 2);
  const auto lm = train_ngram({{0, 0, 1, 2}, {1, 0}}, vocab, 1, 1.0);
  const TokenSeq a{}, b{1, 2, 0};
  EXPECT_EQ(lm->next_dist(a), lm->next_dist(b));
  // counts {3, 2, 1} + 1 over 6 + 3
  EXPECT_DOUBLE_EQ(lm->next_dist(a)[0], 4.0 / 9.0);
}

TEST(TrainNgramTest, ShortPrefixesUseBeginMarker) {
  const Vocab vocab(3, 2);
  const auto lm = train_ngram({{1, 2}}, vocab, 3, 1.0);
  // Position 0 context is (begin, begin) -> token 1.
  const TokenSeq empty{};
  EXPECT_DOUBLE_EQ(lm->next_dist(empty)[1], 2.0 / 4.0);
  // Position 1 context is (begin, 1) -> token 2.
  const TokenSeq one{1};
  EXPECT_DOUBLE_EQ(lm->next_dist(one)[2], 2.0 / 4.0);
}

TEST(TrainNgramTest, Errors) {
  const Vocab vocab(3, 2);
  EXPECT_THROW(train_ngram({}, vocab, 2, 1.0), SpdError);
  EXPECT_THROW(train_ngram({{}}, vocab, 2, 1.0), SpdError);
  EXPECT_THROW(train_ngram({{0}}, vocab, 0, 1.0), SpdError);
  EXPECT_THROW(train_ngram({{0}}, vocab, 2, 0.0), SpdError);
  EXPECT_THROW(train_ngram({{5}}, vocab, 2, 1.0), SpdError);
}

TEST(NgramSmoothingTest, AlwaysValidIncludingUnseenTokens) {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t v = 2 + gen() % 20;
    const auto lm = testing::random_ngram(gen, v, 1 + static_cast<int>(gen() % 3), 0.01 + 0.1 * (gen() % 5));
    for (int k = 0; k < 20; ++k) {
      const TokenSeq prefix = testing::random_tokens(gen, v, gen() % 6);
      // The checked constructor re-validates the invariants.
      const ProbDist d = lm->next_dist(prefix);
      EXPECT_NO_THROW(ProbDist(std::vector<double>(d.probs().begin(), d.probs().end())));
    }
  }
}

TEST(ScoreBlockTest, EmptyBlockIsNextDistAndOneCall) {
  const Vocab vocab(3, 2);
  const auto lm = train_ngram({{0, 1, 2, 1, 0}}, vocab, 2, 1.0);
  const TokenSeq prefix{0};
  const auto out = lm->score_block(prefix, {});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0], lm->next_dist(prefix));
  EXPECT_EQ(lm->calls(), 1u);
}

TEST(ScoreBlockTest, CountsOneCallPerInvocation) {
  const Vocab vocab(3, 2);
  const auto lm = train_ngram({{0, 1, 2, 1, 0}}, vocab, 2, 1.0);
  const TokenSeq prefix{0}, block{1, 2, 0};
  EXPECT_EQ(lm->score_block(prefix, block).size(), 4u);
  lm->score_block(prefix, block);
  EXPECT_EQ(lm->calls(), 2u);
}

TEST(ScoreBlockTest, TooLongBlockIsRejected) {
  const Vocab vocab(3, 2);
  auto lm = std::make_shared<NgramLm>(vocab, 2, 1.0, 3);
  const TokenSeq prefix{0}, block{1, 2, 0, 1};
  try {
    lm->score_block(prefix, block);
    FAIL();
  } catch (const SpdError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBlockTooLong);
  }
  EXPECT_EQ(lm->calls(), 0u);
}

TEST(ScoreBlockTest, ParallelEqualsSequential) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t v = 2 + gen() % 10;
    const auto lm = testing::random_ngram(gen, v, 1 + static_cast<int>(gen() % 3), 0.3);
    const TokenSeq prefix = testing::random_tokens(gen, v, gen() % 5);
    const TokenSeq block = testing::random_tokens(gen, v, gen() % 6);
    const auto scored = lm->score_block(prefix, block);
    ASSERT_EQ(scored.size(), block.size() + 1);
    TokenSeq seq = prefix;
    for (std::size_t j = 0; j <= block.size(); ++j) {
      const ProbDist expect = lm->next_dist(seq);
      for (std::size_t x = 0; x < v; ++x) {
        EXPECT_NEAR(scored[j].probs()[x], expect.probs()[x], 1e-12);
      }
      if (j < block.size()) seq.push_back(block[j]);
    }
  }
}

TEST(ConditioningTest, TargetSeesImageDraftDoesNot) {
  // Order 3: the image token falls inside the context window when text is short.
  const Vocab vocab(4, 3);
  const auto lm = train_ngram({{0, 1, 2}, {1, 1, 0}}, vocab, 3, 0.5);
  const auto target = make_target(lm);
  const auto draft = make_text_draft(lm);
  const MultimodalPrompt with_0({0}, {1});
  const MultimodalPrompt with_1({1}, {1});
  EXPECT_NE(target_dist(target, with_0, {}), target_dist(target, with_1, {}));
  EXPECT_EQ(draft_dist(draft, with_0, {}), draft_dist(draft, with_1, {}));
}

TEST(ConditioningTest, EmptyImageReducesToText) {
  std::mt19937_64 gen(9);
  const auto lm = testing::random_ngram(gen, 5, 3, 0.2);
  const MultimodalPrompt p({}, {1, 2});
  const TokenSeq gen_tokens{3};
  EXPECT_EQ(target_dist(make_target(lm), p, gen_tokens),
            draft_dist(make_text_draft(lm), p, gen_tokens));
  const TokenSeq full{1, 2, 3};
  EXPECT_EQ(target_dist(make_target(lm), p, gen_tokens), lm->next_dist(full));
}

TEST(ConditioningTest, DraftIsImageInvariant) {
  std::mt19937_64 gen(10);
  constexpr std::size_t v = 8;
  std::shared_ptr<NgramLm> lm;
  for (int trial = 0; trial < 1000; ++trial) {
    if (trial % 50 == 0) lm = testing::random_ngram(gen, v, 3, 0.1);
    const auto draft = make_text_draft(lm);
    const TokenSeq text = testing::random_tokens(gen, v, 1 + gen() % 4);
    const TokenSeq generated = testing::random_tokens(gen, v, gen() % 3);
    const MultimodalPrompt a(testing::random_tokens(gen, v, gen() % 5), text);
    const MultimodalPrompt b(testing::random_tokens(gen, v, gen() % 5), text);
    const auto da = draft_dist(draft, a, generated);
    const auto db = draft_dist(draft, b, generated);
    ASSERT_EQ(da, db);  // bitwise
  }
}

TEST(ConditioningTest, UnigramDraftIsConstant) {
  const Vocab vocab(3, 2);
  const auto lm = train_ngram({{0, 0, 1}}, vocab, 1, 1.0);
  const auto draft = make_text_draft(lm);
  const MultimodalPrompt p({2}, {0});
  const TokenSeq g1{}, g2{1, 1, 0};
  EXPECT_EQ(draft_dist(draft, p, g1), draft_dist(draft, p, g2));
}

TEST(ModelFileTest, RoundTripPreservesDistributions) {
  std::mt19937_64 gen(12);
  const auto lm = testing::random_ngram(gen, 6, 3, 0.37);
  const auto path = std::filesystem::temp_directory_path() / "spdmm_models_test.json";
  save_ngram(*lm, path);
  const auto loaded = load_ngram(path);
  std::filesystem::remove(path);
  EXPECT_EQ(loaded->order(), 3);
  EXPECT_EQ(loaded->alpha(), 0.37);
  EXPECT_EQ(loaded->vocab(), lm->vocab());
  for (int k = 0; k < 200; ++k) {
    const TokenSeq prefix = testing::random_tokens(gen, 6, gen() % 4);
    ASSERT_EQ(loaded->next_dist(prefix), lm->next_dist(prefix));
  }
  EXPECT_EQ(ngram_to_json(*loaded), ngram_to_json(*lm));
}

TEST(ModelFileTest, FormatFields) {
  const Vocab vocab(2, 1);
  const auto lm = train_ngram({{0, 1, 0, 1}}, vocab, 2, 1.0);
  EXPECT_EQ(ngram_to_json(*lm),
            R"({"alpha":1.0,"counts":[[[-1],[1.0,0.0]],[[0],[0.0,2.0]],[[1],[1.0,0.0]]],)"
            R"("eos":1,"format":"ngram-v1","order":2,"vocab_size":2})");
}

TEST(ModelFileTest, RejectsBadDocuments) {
  EXPECT_THROW(ngram_from_json("not json"), SpdError);
  EXPECT_THROW(ngram_from_json(R"({"format":"ngram-v2"})"), SpdError);
  EXPECT_THROW(
      ngram_from_json(
          R"({"format":"ngram-v1","order":2,"alpha":1,"vocab_size":2,"eos":1,"counts":[[[0],[1]]]})"),
      SpdError);
  EXPECT_THROW(load_ngram("/nonexistent/model.json"), SpdError);
}

}  // namespace
}  // namespace spdmm
