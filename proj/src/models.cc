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


#include "spdmm/models.h"

#include <algorithm>
#include <string>

#include "spdmm/kernels.h"

namespace spdmm {

std::vector<ProbDist> LanguageModel::score_block(std::span<const TokenId> prefix,
                                                 std::span<const TokenId> block) const {
  if (block.size() > max_block_) {
    throw SpdError(ErrorCode::kBlockTooLong,
                   "block of " + std::to_string(block.size()) + " exceeds max " +
                       std::to_string(max_block_));
  }
  calls_.fetch_add(1, std::memory_order_relaxed);
  return score_positions(prefix, block);
}

std::vector<ProbDist> LanguageModel::score_positions(std::span<const TokenId> prefix,
                                                     std::span<const TokenId> block) const {
  TokenSeq buf(prefix.begin(), prefix.end());
  buf.reserve(prefix.size() + block.size());
  std::vector<ProbDist> out;
  out.reserve(block.size() + 1);
  for (std::size_t j = 0; j <= block.size(); ++j) {
    out.push_back(next_dist(buf));
    if (j < block.size()) buf.push_back(block[j]);
  }
  return out;
}

NgramLm::NgramLm(Vocab vocab, int order, double alpha, std::size_t max_block)
    : LanguageModel(vocab, max_block),
      order_(order),
      alpha_(alpha),
      zeros_(vocab.size(), 0.0) {
  if (order < 1) {
    throw SpdError(ErrorCode::kInvalidArgument, "n-gram order must be >= 1");
  }
  if (!(alpha > 0.0)) {
    throw SpdError(ErrorCode::kInvalidArgument, "smoothing alpha must be > 0");
  }
}

NgramLm::Context NgramLm::context_of(std::span<const TokenId> prefix) const {
  const std::size_t width = static_cast<std::size_t>(order_ - 1);
  Context ctx(width, kBeginMarker);
  const std::size_t take = std::min(width, prefix.size());
  std::copy(prefix.end() - static_cast<std::ptrdiff_t>(take), prefix.end(),
            ctx.end() - static_cast<std::ptrdiff_t>(take));
  return ctx;
}

void NgramLm::add_count(const Context& context, TokenId next, double count) {
  if (context.size() != static_cast<std::size_t>(order_ - 1)) {
    throw SpdError(ErrorCode::kInvalidArgument, "context width does not match order");
  }
  if (!vocab().contains(next)) {
    throw SpdError(ErrorCode::kInvalidArgument,
                   "token " + std::to_string(next) + " outside vocab");
  }
  auto [it, inserted] = rows_.try_emplace(context);
  if (inserted) it->second.counts.assign(vocab().size(), 0.0);
  it->second.counts[static_cast<std::size_t>(next)] += count;
  it->second.total += count;
}

ProbDist NgramLm::next_dist(std::span<const TokenId> prefix) const {
  const std::size_t v = vocab().size();
  const auto it = rows_.find(context_of(prefix));
  const double* counts = it == rows_.end() ? zeros_.data() : it->second.counts.data();
  const double total = it == rows_.end() ? 0.0 : it->second.total;
  std::vector<double> out(v);
  kernels::active().smooth(counts, alpha_, total + alpha_ * static_cast<double>(v),
                           out.data(), v);
  return ProbDist::from_trusted(std::move(out));
}

std::shared_ptr<NgramLm> train_ngram(const std::vector<TokenSeq>& corpus,
                                     const Vocab& vocab, int order, double alpha) {
  const bool any_tokens = std::any_of(corpus.begin(), corpus.end(),
                                      [](const TokenSeq& s) { return !s.empty(); });
  if (!any_tokens) {
    throw SpdError(ErrorCode::kEmptyCorpus, "training corpus has no tokens");
  }
  auto model = std::make_shared<NgramLm>(vocab, order, alpha);
  for (const TokenSeq& seq : corpus) {
    for (std::size_t i = 0; i < seq.size(); ++i) {
      const std::span<const TokenId> prefix(seq.data(), i);
      model->add_count(model->context_of(prefix), seq[i]);
    }
  }
  return model;
}

ConditionedLm::ConditionedLm(std::shared_ptr<const LanguageModel> base,
                             Conditioning conditioning)
    : base_(std::move(base)), conditioning_(conditioning) {
  if (!base_) {
    throw SpdError(ErrorCode::kInvalidArgument, "null base model");
  }
}

TokenSeq ConditionedLm::context(const MultimodalPrompt& prompt,
                                std::span<const TokenId> generated) const {
  TokenSeq ctx;
  const bool with_image = conditioning_ == Conditioning::kImageAndText;
  ctx.reserve((with_image ? prompt.image_ctx.size() : 0) + prompt.text.size() +
              generated.size());
  if (with_image) ctx.insert(ctx.end(), prompt.image_ctx.begin(), prompt.image_ctx.end());
  ctx.insert(ctx.end(), prompt.text.begin(), prompt.text.end());
  ctx.insert(ctx.end(), generated.begin(), generated.end());
  return ctx;
}

}  // namespace spdmm
