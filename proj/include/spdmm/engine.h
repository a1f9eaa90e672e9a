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

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "spdmm/core.h"
#include "spdmm/models.h"

namespace spdmm {

enum class DecodeMode { kStochastic, kGreedy };

std::string_view decode_mode_name(DecodeMode mode);
DecodeMode parse_decode_mode(std::string_view name);

struct SpdConfig {
  int gamma = 3;
  DecodeMode mode = DecodeMode::kGreedy;
  int max_new_tokens = 64;
  bool stop_on_eos = true;

  void validate() const;
};

// Independent substreams for the three kinds of random draws in one
// generation. Greedy decoding never touches them.
struct SpdRng {
  RngState draft;
  RngState verify;
  RngState resample;

  static SpdRng from_seed(std::uint64_t seed) {
    return SpdRng{RngState(seed, RngStream::kDraft), RngState(seed, RngStream::kVerify),
                  RngState(seed, RngStream::kResample)};
  }
};

struct DraftBlock {
  TokenSeq tokens;
  std::vector<ProbDist> dists;  // draft distribution each token was chosen from
};

enum class CorrectionKind { kResidualResample, kGreedyCorrection, kBonus };

std::string_view correction_kind_name(CorrectionKind kind);

struct VerifyOutcome {
  int accepted = 0;
  // Accepted prefix plus the correction or bonus token; not yet truncated.
  TokenSeq emitted;
  CorrectionKind correction_kind = CorrectionKind::kBonus;
};

struct BlockRecord {
  TokenSeq draft_tokens;
  std::vector<bool> accepted_flags;  // one per drafted token
  TokenSeq emitted;                  // full verification output
  std::size_t appended = 0;          // emitted tokens kept after EOS / length truncation
  CorrectionKind correction_kind = CorrectionKind::kBonus;
};

struct BlockTrace {
  std::vector<BlockRecord> blocks;
  std::uint64_t target_calls = 0;
  std::uint64_t draft_calls = 0;

  // Sum of full verification emissions over all blocks.
  std::uint64_t emitted_tokens() const;
};

struct SpdResult {
  TokenSeq tokens;
  BlockTrace trace;
};

struct ArResult {
  TokenSeq tokens;
  std::uint64_t calls = 0;
};

// Drafts exactly gamma tokens; EOS proposed by the draft does not end the block.
DraftBlock draft_block(const ConditionedLm& draft, const MultimodalPrompt& prompt,
                       std::span<const TokenId> generated, int gamma, DecodeMode mode,
                       RngState& rng);

// min(1, q_val / p_val). Throws DraftZeroProb when p_val == 0.
double accept_prob(double p_val, double q_val);

// normalize(max(0, q - p)). Throws AllZero when q dominates nowhere (q == p).
ProbDist residual_dist(const ProbDist& q, const ProbDist& p);

// target_dists comes from one score_block call and has |block| + 1 entries.
// Uses one uniform from `verify` per inspected position, and one draw from
// `resample` for the residual or bonus token.
VerifyOutcome verify_stochastic(std::span<const ProbDist> target_dists,
                                const DraftBlock& block, RngState& verify,
                                RngState& resample);

VerifyOutcome verify_greedy(std::span<const ProbDist> target_dists,
                            const DraftBlock& block);

SpdResult spd_generate(const ConditionedLm& target, const ConditionedLm& draft,
                       const MultimodalPrompt& prompt, const SpdConfig& cfg,
                       SpdRng rng);

ArResult autoregressive_generate(const ConditionedLm& target,
                                 const MultimodalPrompt& prompt, int max_new_tokens,
                                 DecodeMode mode, RngState rng, bool stop_on_eos = true);

}  // namespace spdmm
