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


#include "spdmm/metrics.h"

#include <algorithm>
#include <string>

namespace spdmm::metrics {

namespace {

// Running mean clamped to the observed range so rounding never leaves it.
class MeanAccumulator {
 public:
  void add(double x) {
    ++n_;
    mean_ += (x - mean_) / static_cast<double>(n_);
    lo_ = n_ == 1 ? x : std::min(lo_, x);
    hi_ = n_ == 1 ? x : std::max(hi_, x);
  }
  double mean() const { return std::clamp(mean_, lo_, hi_); }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double lo_ = 0.0;
  double hi_ = 0.0;
};

}  // namespace

CostModel::CostModel(double c) : c_(c) {
  if (!(c > 0.0 && c <= 1.0)) {
    throw SpdError(ErrorCode::kInvalidArgument,
                   "relative latency c must lie in (0, 1], got " + std::to_string(c));
  }
}

double block_efficiency(const BlockTrace& trace) {
  if (trace.target_calls == 0) {
    throw SpdError(ErrorCode::kEmptyTrace, "trace has no target calls");
  }
  return static_cast<double>(trace.emitted_tokens()) /
         static_cast<double>(trace.target_calls);
}

double mbsu(double tau, int gamma, const CostModel& cost) {
  return tau / (cost.c() * gamma + 1.0);
}

double mbsu_paper_formula(double tau, int gamma, const CostModel& cost) {
  return cost.c() * tau / (cost.c() * gamma + 1.0);
}

double token_rate_ratio(double spd_tokens, double spd_time_s, double ar_tokens,
                        double ar_time_s) {
  if (!(spd_time_s > 0.0) || !(ar_time_s > 0.0)) {
    throw SpdError(ErrorCode::kZeroTime, "token rate needs positive generation time");
  }
  if (!(spd_tokens > 0.0) || !(ar_tokens > 0.0)) {
    throw SpdError(ErrorCode::kInvalidArgument, "token rate needs positive token counts");
  }
  return (spd_tokens / spd_time_s) / (ar_tokens / ar_time_s);
}

AggregateMetrics aggregate(std::span<const PromptMetrics> records) {
  if (records.empty()) throw SpdError(ErrorCode::kEmpty, "no records to aggregate");
  AggregateMetrics agg;
  agg.prompts = records.size();
  MeanAccumulator tau;
  MeanAccumulator speedup;
  MeanAccumulator paper;
  for (const auto& r : records) {
    tau.add(r.tau);
    speedup.add(r.mbsu);
    paper.add(r.mbsu_paper);
    agg.spd_tokens += r.tokens;
    agg.ar_tokens += r.ar_tokens;
    agg.spd_time_s += r.wall_time_s;
    agg.ar_time_s += r.ar_wall_time_s;
  }
  agg.mean_tau = tau.mean();
  agg.mean_mbsu = speedup.mean();
  agg.mean_mbsu_paper = paper.mean();
  if (agg.spd_time_s > 0.0) {
    agg.spd_token_rate = static_cast<double>(agg.spd_tokens) / agg.spd_time_s;
  }
  if (agg.ar_time_s > 0.0) {
    agg.ar_token_rate = static_cast<double>(agg.ar_tokens) / agg.ar_time_s;
  }
  if (agg.spd_time_s > 0.0 && agg.ar_time_s > 0.0 && agg.spd_tokens > 0 && agg.ar_tokens > 0) {
    agg.token_rate_ratio =
        token_rate_ratio(static_cast<double>(agg.spd_tokens), agg.spd_time_s,
                         static_cast<double>(agg.ar_tokens), agg.ar_time_s);
  }
  return agg;
}

}  // namespace spdmm::metrics
