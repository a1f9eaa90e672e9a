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


#include "spdmm/oracle.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace spdmm::oracle {

namespace {

void guard_size(std::size_t vocab, int exponent) {
  if (std::pow(static_cast<double>(vocab), exponent) > kMaxEnumeration) {
    throw SpdError(ErrorCode::kTooLarge,
                   "enumeration over " + std::to_string(vocab) + "^" +
                       std::to_string(exponent) + " sequences exceeds the limit");
  }
}

bool terminal(const TokenSeq& seq, std::size_t length, bool stop_on_eos, TokenId eos) {
  return seq.size() >= length || (stop_on_eos && !seq.empty() && seq.back() == eos);
}

// Exact SPD path enumeration, memoized on the generated prefix: the law of
// everything after a block boundary depends only on the tokens so far.
class SpdEnumerator {
 public:
  SpdEnumerator(const ConditionedLm& target, const ConditionedLm& draft,
                const MultimodalPrompt& prompt, int gamma, int length, bool stop_on_eos)
      : target_(target),
        draft_(draft),
        prompt_(prompt),
        gamma_(static_cast<std::size_t>(gamma)),
        length_(static_cast<std::size_t>(length)),
        stop_on_eos_(stop_on_eos),
        eos_(target.vocab().eos()),
        vocab_(target.vocab().size()) {}

  const SeqDist& from(const TokenSeq& generated) {
    if (auto it = memo_.find(generated); it != memo_.end()) return it->second;
    SeqDist out;
    if (terminal(generated, length_, stop_on_eos_, eos_)) {
      out[generated] = 1.0;
    } else {
      TokenSeq block;
      expand_drafts(generated, block, 1.0, out);
    }
    return memo_.emplace(generated, std::move(out)).first->second;
  }

 private:
  void expand_drafts(const TokenSeq& generated, TokenSeq& block, double block_prob,
                     SeqDist& out) {
    if (block.size() == gamma_) {
      verify_paths(generated, block, block_prob, out);
      return;
    }
    TokenSeq ctx = draft_.context(prompt_, generated);
    ctx.insert(ctx.end(), block.begin(), block.end());
    const ProbDist p = draft_.base().next_dist(ctx);
    for (std::size_t x = 0; x < vocab_; ++x) {
      if (p.probs()[x] <= 0.0) continue;
      block.push_back(static_cast<TokenId>(x));
      expand_drafts(generated, block, block_prob * p.probs()[x], out);
      block.pop_back();
    }
  }

  void verify_paths(const TokenSeq& generated, const TokenSeq& block, double block_prob,
                    SeqDist& out) {
    TokenSeq draft_ctx = draft_.context(prompt_, generated);
    TokenSeq target_ctx = target_.context(prompt_, generated);
    double reach = block_prob;  // probability of having accepted block[0..j)
    for (std::size_t j = 0; j < block.size(); ++j) {
      const ProbDist p_dist = draft_.base().next_dist(draft_ctx);
      const ProbDist q_dist = target_.base().next_dist(target_ctx);
      const auto p = p_dist.probs();
      const auto q = q_dist.probs();
      const std::size_t x = static_cast<std::size_t>(block[j]);
      const double accept = std::min(1.0, q[x] / p[x]);
      const double reject_mass = reach * (1.0 - accept);
      if (reject_mass > 0.0) {
        std::vector<double> residual(vocab_);
        double total = 0.0;
        for (std::size_t y = 0; y < vocab_; ++y) {
          residual[y] = std::max(0.0, q[y] - p[y]);
          total += residual[y];
        }
        for (std::size_t y = 0; y < vocab_; ++y) {
          if (residual[y] <= 0.0) continue;
          TokenSeq emission(block.begin(), block.begin() + static_cast<std::ptrdiff_t>(j));
          emission.push_back(static_cast<TokenId>(y));
          emit(generated, emission, reject_mass * residual[y] / total, out);
        }
      }
      reach *= accept;
      if (reach <= 0.0) return;
      draft_ctx.push_back(block[j]);
      target_ctx.push_back(block[j]);
    }
    const ProbDist bonus = target_.base().next_dist(target_ctx);
    for (std::size_t y = 0; y < vocab_; ++y) {
      if (bonus.probs()[y] <= 0.0) continue;
      TokenSeq emission = block;
      emission.push_back(static_cast<TokenId>(y));
      emit(generated, emission, reach * bonus.probs()[y], out);
    }
  }

  void emit(const TokenSeq& generated, const TokenSeq& emission, double mass, SeqDist& out) {
    TokenSeq next = generated;
    for (const TokenId t : emission) {
      if (terminal(next, length_, stop_on_eos_, eos_)) break;
      next.push_back(t);
    }
    for (const auto& [seq, m] : from(next)) out[seq] += mass * m;
  }

  const ConditionedLm& target_;
  const ConditionedLm& draft_;
  const MultimodalPrompt& prompt_;
  std::size_t gamma_;
  std::size_t length_;
  bool stop_on_eos_;
  TokenId eos_;
  std::size_t vocab_;
  std::map<TokenSeq, SeqDist> memo_;
};

void enumerate_ar(const ConditionedLm& target, const MultimodalPrompt& prompt,
                  TokenSeq& generated, double mass, std::size_t length, bool stop_on_eos,
                  SeqDist& out) {
  if (terminal(generated, length, stop_on_eos, target.vocab().eos())) {
    out[generated] += mass;
    return;
  }
  const ProbDist q = target.dist(prompt, generated);
  for (std::size_t x = 0; x < q.size(); ++x) {
    if (q.probs()[x] <= 0.0) continue;
    generated.push_back(static_cast<TokenId>(x));
    enumerate_ar(target, prompt, generated, mass * q.probs()[x], length, stop_on_eos, out);
    generated.pop_back();
  }
}

}  // namespace

ProbDist induced_step_dist(const ProbDist& p, const ProbDist& q) {
  if (p.size() != q.size()) {
    throw SpdError(ErrorCode::kShapeMismatch, "p and q sizes differ");
  }
  const std::size_t n = p.size();
  std::vector<double> accept_path(n, 0.0);
  double reject_total = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    if (p.probs()[x] <= 0.0) continue;
    const double a = std::min(1.0, q.probs()[x] / p.probs()[x]);
    accept_path[x] = p.probs()[x] * a;
    reject_total += p.probs()[x] * (1.0 - a);
  }
  std::vector<double> out = accept_path;
  if (reject_total > 0.0) {
    std::vector<double> residual(n);
    double residual_sum = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
      residual[x] = std::max(0.0, q.probs()[x] - p.probs()[x]);
      residual_sum += residual[x];
    }
    for (std::size_t x = 0; x < n; ++x) {
      out[x] += reject_total * residual[x] / residual_sum;
    }
  }
  return ProbDist::from_trusted(std::move(out));
}

SeqDist enumerate_autoregressive(const ConditionedLm& target, const MultimodalPrompt& prompt,
                                 int length, bool stop_on_eos) {
  if (length < 1) throw SpdError(ErrorCode::kInvalidArgument, "length must be >= 1");
  guard_size(target.vocab().size(), length);
  SeqDist out;
  TokenSeq generated;
  enumerate_ar(target, prompt, generated, 1.0, static_cast<std::size_t>(length), stop_on_eos,
               out);
  return out;
}

SeqDist enumerate_spd(const ConditionedLm& target, const ConditionedLm& draft,
                      const MultimodalPrompt& prompt, const SpdConfig& cfg, int length) {
  if (length < 1) throw SpdError(ErrorCode::kInvalidArgument, "length must be >= 1");
  if (cfg.gamma < 1) throw SpdError(ErrorCode::kInvalidArgument, "gamma must be >= 1");
  if (cfg.mode != DecodeMode::kStochastic) {
    throw SpdError(ErrorCode::kInvalidArgument, "enumerate_spd requires stochastic mode");
  }
  guard_size(target.vocab().size(), length);
  guard_size(target.vocab().size(), cfg.gamma);
  SpdEnumerator e(target, draft, prompt, cfg.gamma, length, cfg.stop_on_eos);
  return e.from(TokenSeq{});
}

double total_mass(const SeqDist& d) {
  double s = 0.0;
  for (const auto& [seq, m] : d) s += m;
  return s;
}

double linf_distance(const SeqDist& a, const SeqDist& b) {
  double worst = 0.0;
  for (const auto& [seq, m] : a) {
    const auto it = b.find(seq);
    worst = std::max(worst, std::abs(m - (it == b.end() ? 0.0 : it->second)));
  }
  for (const auto& [seq, m] : b) {
    if (!a.contains(seq)) worst = std::max(worst, std::abs(m));
  }
  return worst;
}

}  // namespace spdmm::oracle
