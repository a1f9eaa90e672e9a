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

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "spdmm/core.h"

namespace spdmm {

// Autoregressive language model over a fixed vocabulary.
//
// score_block() is the parallel-scoring entry point: one invocation is one
// "model call" no matter how many positions it scores. next_dist() is the
// uncounted single-position query used for drafting and by oracles.
class LanguageModel {
 public:
  static constexpr std::size_t kDefaultMaxBlock = 64;

  explicit LanguageModel(Vocab vocab, std::size_t max_block = kDefaultMaxBlock)
      : vocab_(vocab), max_block_(max_block) {}
  virtual ~LanguageModel() = default;

  LanguageModel(const LanguageModel&) = delete;
  LanguageModel& operator=(const LanguageModel&) = delete;

  virtual ProbDist next_dist(std::span<const TokenId> prefix) const = 0;

  // Returns |block| + 1 distributions: element j conditions on
  // prefix ++ block[0..j). Throws BlockTooLong if |block| > max_block().
  std::vector<ProbDist> score_block(std::span<const TokenId> prefix,
                                    std::span<const TokenId> block) const;

  const Vocab& vocab() const noexcept { return vocab_; }
  std::size_t max_block() const noexcept { return max_block_; }
  std::uint64_t calls() const noexcept { return calls_.load(std::memory_order_relaxed); }
  void reset_calls() noexcept { calls_.store(0, std::memory_order_relaxed); }

 protected:
  // Default scores each position with next_dist on a growing buffer.
  virtual std::vector<ProbDist> score_positions(std::span<const TokenId> prefix,
                                                std::span<const TokenId> block) const;

 private:
  Vocab vocab_;
  std::size_t max_block_;
  mutable std::atomic<std::uint64_t> calls_{0};
};

// Additive (Laplace / Lidstone) smoothed n-gram model. Contexts shorter than
// order - 1 are left-padded with kBeginMarker.
class NgramLm final : public LanguageModel {
 public:
  using Context = std::vector<TokenId>;

  struct Row {
    std::vector<double> counts;  // one per vocab token
    double total = 0.0;
  };

  NgramLm(Vocab vocab, int order, double alpha,
          std::size_t max_block = kDefaultMaxBlock);

  ProbDist next_dist(std::span<const TokenId> prefix) const override;

  // Adds one occurrence of `next` after `context` (length order - 1).
  void add_count(const Context& context, TokenId next, double count = 1.0);

  int order() const noexcept { return order_; }
  double alpha() const noexcept { return alpha_; }
  // Ordered by context so serialization is deterministic.
  const std::map<Context, Row>& rows() const noexcept { return rows_; }

  Context context_of(std::span<const TokenId> prefix) const;

 private:
  int order_;
  double alpha_;
  std::map<Context, Row> rows_;
  std::vector<double> zeros_;
};

// Every sequence contributes one count per position; position 0 conditions
// on an all-begin-marker context.
std::shared_ptr<NgramLm> train_ngram(const std::vector<TokenSeq>& corpus,
                                     const Vocab& vocab, int order, double alpha);

// Versioned JSON ("ngram-v1") persistence.
void save_ngram(const NgramLm& model, const std::filesystem::path& path);
std::shared_ptr<NgramLm> load_ngram(const std::filesystem::path& path);
std::string ngram_to_json(const NgramLm& model);
std::shared_ptr<NgramLm> ngram_from_json(const std::string& text);

enum class Conditioning {
  kImageAndText,  // image_ctx ++ text ++ generated
  kTextOnly,      // text ++ generated
};

// A language model bound to a conditioning rule for multimodal prompts.
class ConditionedLm {
 public:
  ConditionedLm(std::shared_ptr<const LanguageModel> base, Conditioning conditioning);

  TokenSeq context(const MultimodalPrompt& prompt,
                   std::span<const TokenId> generated) const;

  ProbDist dist(const MultimodalPrompt& prompt, std::span<const TokenId> generated) const {
    return base_->next_dist(context(prompt, generated));
  }

  std::vector<ProbDist> score_block(const MultimodalPrompt& prompt,
                                    std::span<const TokenId> generated,
                                    std::span<const TokenId> block) const {
    return base_->score_block(context(prompt, generated), block);
  }

  const LanguageModel& base() const noexcept { return *base_; }
  const Vocab& vocab() const noexcept { return base_->vocab(); }
  Conditioning conditioning() const noexcept { return conditioning_; }

 private:
  std::shared_ptr<const LanguageModel> base_;
  Conditioning conditioning_;
};

// Multimodal target: conditions on the image context and the text.
inline ConditionedLm make_target(std::shared_ptr<const LanguageModel> base) {
  return ConditionedLm(std::move(base), Conditioning::kImageAndText);
}

// Text-only draft: never sees image_ctx.
inline ConditionedLm make_text_draft(std::shared_ptr<const LanguageModel> base) {
  return ConditionedLm(std::move(base), Conditioning::kTextOnly);
}

inline ProbDist target_dist(const ConditionedLm& target, const MultimodalPrompt& prompt,
                            std::span<const TokenId> generated) {
  return target.dist(prompt, generated);
}

inline ProbDist draft_dist(const ConditionedLm& draft, const MultimodalPrompt& prompt,
                           std::span<const TokenId> generated) {
  return draft.dist(prompt, generated);
}

}  // namespace spdmm
