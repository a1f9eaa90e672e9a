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

// Brute-force reference computations for speculative decoding. These walk
// every random path with exact probabilities; they share no code with the
// engine beyond the models' next_dist().

#include <map>

#include "spdmm/core.h"
#include "spdmm/engine.h"
#include "spdmm/models.h"

namespace spdmm::oracle {

// Exact probability of each terminal output sequence. A sequence terminates
// at length L or, when stopping on EOS, right after the first EOS.
using SeqDist = std::map<TokenSeq, double>;

inline constexpr double kMaxEnumeration = 1e6;

// Marginal of the token emitted at a single drafted position:
//   p(x) min(1, q(x)/p(x)) + P(reject) * residual(x).
ProbDist induced_step_dist(const ProbDist& p, const ProbDist& q);

SeqDist enumerate_autoregressive(const ConditionedLm& target, const MultimodalPrompt& prompt,
                                 int length, bool stop_on_eos = true);

// cfg.mode must be stochastic; cfg.max_new_tokens is ignored in favour of `length`.
SeqDist enumerate_spd(const ConditionedLm& target, const ConditionedLm& draft,
                      const MultimodalPrompt& prompt, const SpdConfig& cfg, int length);

double total_mass(const SeqDist& d);

// Max absolute difference over the union of supports.
double linf_distance(const SeqDist& a, const SeqDist& b);

}  // namespace spdmm::oracle
