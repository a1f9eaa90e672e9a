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
#include <optional>
#include <span>
#include <string>

#include "spdmm/engine.h"

namespace spdmm::metrics {

// Draft cost relative to one target pass, taken as the parameter-count ratio.
class CostModel {
 public:
  explicit CostModel(double c);
  static CostModel from_param_counts(double draft_params, double target_params) {
    return CostModel(draft_params / target_params);
  }
  double c() const noexcept { return c_; }

 private:
  double c_;
};

// Tokens produced per target call. Counts every verification emission in
// full, including tokens later cut by EOS or the length limit.
double block_efficiency(const BlockTrace& trace);

// tau / (c * gamma + 1): gamma draft passes plus one target pass per block.
double mbsu(double tau, int gamma, const CostModel& cost);

// c * tau / (c * gamma + 1), reported alongside mbsu() for comparison only.
double mbsu_paper_formula(double tau, int gamma, const CostModel& cost);

double token_rate_ratio(double spd_tokens, double spd_time_s, double ar_tokens,
                        double ar_time_s);

struct PromptMetrics {
  std::string prompt_id;
  int gamma = 0;
  DecodeMode mode = DecodeMode::kGreedy;
  std::uint64_t tokens = 0;
  std::uint64_t target_calls = 0;
  double tau = 0.0;
  double mbsu = 0.0;
  double mbsu_paper = 0.0;
  double wall_time_s = 0.0;
  std::uint64_t ar_tokens = 0;
  double ar_wall_time_s = 0.0;
};

struct AggregateMetrics {
  std::size_t prompts = 0;
  double mean_tau = 0.0;
  double mean_mbsu = 0.0;
  double mean_mbsu_paper = 0.0;
  std::uint64_t spd_tokens = 0;
  std::uint64_t ar_tokens = 0;
  double spd_time_s = 0.0;
  double ar_time_s = 0.0;
  // Pooled over prompts; empty when either total time is zero.
  std::optional<double> spd_token_rate;
  std::optional<double> ar_token_rate;
  std::optional<double> token_rate_ratio;
};

// Unweighted per-prompt means for tau and MBSU; token rates from summed
// tokens over summed time. Throws Empty for no records.
AggregateMetrics aggregate(std::span<const PromptMetrics> records);

}  // namespace spdmm::metrics
