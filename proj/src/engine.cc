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


#include "spdmm/engine.h"

#include <algorithm>
#include <string>

#include "spdmm/kernels.h"

namespace spdmm {

std::string_view decode_mode_name(DecodeMode mode) {
  return mode == DecodeMode::kGreedy ? "greedy" : "stochastic";
}

DecodeMode parse_decode_mode(std::string_view name) {
  if (name == "greedy") return DecodeMode::kGreedy;
  if (name == "stochastic") return DecodeMode::kStochastic;
  throw SpdError(ErrorCode::kInvalidArgument,
                 "unknown decode mode '" + std::string(name) + "'");
}

std::string_view correction_kind_name(CorrectionKind kind) {
  switch (kind) {
    case CorrectionKind::kResidualResample:
      return "residual-resample";
    case CorrectionKind::kGreedyCorrection:
      return "greedy-correction";
    case CorrectionKind::kBonus:
      return "bonus";
  }
  return "unknown";
}

void SpdConfig::validate() const {
  if (gamma < 1) throw SpdError(ErrorCode::kInvalidArgument, "gamma must be >= 1");
  if (max_new_tokens < 1) {
    throw SpdError(ErrorCode::kInvalidArgument, "max_new_tokens must be >= 1");
  }
}

std::uint64_t BlockTrace::emitted_tokens() const {
  std::uint64_t n = 0;
  for (const auto& b : blocks) n += b.emitted.size();
  return n;
}

DraftBlock draft_block(const ConditionedLm& draft, const MultimodalPrompt& prompt,
                       std::span<const TokenId> generated, int gamma, DecodeMode mode,
                       RngState& rng) {
  if (gamma < 1) throw SpdError(ErrorCode::kInvalidArgument, "gamma must be >= 1");
  DraftBlock block;
  block.tokens.reserve(static_cast<std::size_t>(gamma));
  block.dists.reserve(static_cast<std::size_t>(gamma));
  TokenSeq ctx = draft.context(prompt, generated);
  for (int j = 0; j < gamma; ++j) {
    ProbDist d = draft.base().next_dist(ctx);
    const TokenId t = mode == DecodeMode::kGreedy ? argmax(d) : sample(d, rng);
    block.tokens.push_back(t);
    block.dists.push_back(std::move(d));
    ctx.push_back(t);
  }
  return block;
}

double accept_prob(double p_val, double q_val) {
  if (p_val == 0.0) {
    throw SpdError(ErrorCode::kDraftZeroProb, "drafted token has zero draft probability");
  }
  return std::min(1.0, q_val / p_val);
}

ProbDist residual_dist(const ProbDist& q, const ProbDist& p) {
  if (q.size() != p.size()) {
    throw SpdError(ErrorCode::kShapeMismatch, "residual of differently sized distributions");
  }
  std::vector<double> raw(q.size());
  const auto& k = kernels::active();
  const double mass = k.residual(q.probs().data(), p.probs().data(), raw.data(), raw.size());
  if (!(mass > 0.0)) {
    throw SpdError(ErrorCode::kAllZero, "residual distribution has no mass");
  }
  return normalize(raw);
}

namespace {

void check_shape(std::span<const ProbDist> target_dists, const DraftBlock& block) {
  if (block.tokens.size() != block.dists.size() ||
      target_dists.size() != block.tokens.size() + 1) {
    throw SpdError(ErrorCode::kShapeMismatch,
                   "expected " + std::to_string(block.tokens.size() + 1) +
                       " target distributions, got " + std::to_string(target_dists.size()));
  }
}

}  // namespace

VerifyOutcome verify_stochastic(std::span<const ProbDist> target_dists,
                                const DraftBlock& block, RngState& verify,
                                RngState& resample) {
  check_shape(target_dists, block);
  VerifyOutcome out;
  for (std::size_t j = 0; j < block.tokens.size(); ++j) {
    const TokenId x = block.tokens[j];
    const double ratio = accept_prob(block.dists[j][x], target_dists[j][x]);
    if (verify.next_uniform() < ratio) {
      out.emitted.push_back(x);
      ++out.accepted;
      continue;
    }
    out.emitted.push_back(sample(residual_dist(target_dists[j], block.dists[j]), resample));
    out.correction_kind = CorrectionKind::kResidualResample;
    return out;
  }
  out.emitted.push_back(sample(target_dists.back(), resample));
  out.correction_kind = CorrectionKind::kBonus;
  return out;
}

VerifyOutcome verify_greedy(std::span<const ProbDist> target_dists,
                            const DraftBlock& block) {
  check_shape(target_dists, block);
  VerifyOutcome out;
  for (std::size_t j = 0; j < block.tokens.size(); ++j) {
    const TokenId best = argmax(target_dists[j]);
    if (block.tokens[j] == best) {
      out.emitted.push_back(best);
      ++out.accepted;
      continue;
    }
    out.emitted.push_back(best);
    out.correction_kind = CorrectionKind::kGreedyCorrection;
    return out;
  }
  out.emitted.push_back(argmax(target_dists.back()));
  out.correction_kind = CorrectionKind::kBonus;
  return out;
}

SpdResult spd_generate(const ConditionedLm& target, const ConditionedLm& draft,
                       const MultimodalPrompt& prompt, const SpdConfig& cfg, SpdRng rng) {
  cfg.validate();
  if (!(target.vocab() == draft.vocab())) {
    throw SpdError(ErrorCode::kShapeMismatch, "target and draft vocabularies differ");
  }
  const auto limit = static_cast<std::size_t>(cfg.max_new_tokens);
  const TokenId eos = target.vocab().eos();
  SpdResult result;
  bool stopped = false;
  while (!stopped && result.tokens.size() < limit) {
    DraftBlock block = draft_block(draft, prompt, result.tokens, cfg.gamma, cfg.mode, rng.draft);
    result.trace.draft_calls += block.tokens.size();

    const std::vector<ProbDist> target_dists =
        target.score_block(prompt, result.tokens, block.tokens);
    ++result.trace.target_calls;

    VerifyOutcome outcome = cfg.mode == DecodeMode::kGreedy
                                ? verify_greedy(target_dists, block)
                                : verify_stochastic(target_dists, block, rng.verify,
                                                    rng.resample);

    BlockRecord record;
    record.accepted_flags.assign(block.tokens.size(), false);
    std::fill_n(record.accepted_flags.begin(), outcome.accepted, true);
    record.correction_kind = outcome.correction_kind;
    for (const TokenId t : outcome.emitted) {
      if (result.tokens.size() >= limit) break;
      result.tokens.push_back(t);
      ++record.appended;
      if (cfg.stop_on_eos && t == eos) {
        stopped = true;
        break;
      }
    }
    record.draft_tokens = std::move(block.tokens);
    record.emitted = std::move(outcome.emitted);
    result.trace.blocks.push_back(std::move(record));
  }
  return result;
}

ArResult autoregressive_generate(const ConditionedLm& target,
                                 const MultimodalPrompt& prompt, int max_new_tokens,
                                 DecodeMode mode, RngState rng, bool stop_on_eos) {
  if (max_new_tokens < 1) {
    throw SpdError(ErrorCode::kInvalidArgument, "max_new_tokens must be >= 1");
  }
  const TokenId eos = target.vocab().eos();
  ArResult result;
  while (result.tokens.size() < static_cast<std::size_t>(max_new_tokens)) {
    const auto dists = target.score_block(prompt, result.tokens, {});
    ++result.calls;
    const TokenId t = mode == DecodeMode::kGreedy ? argmax(dists[0]) : sample(dists[0], rng);
    result.tokens.push_back(t);
    if (stop_on_eos && t == eos) break;
  }
  return result;
}

}  // namespace spdmm
