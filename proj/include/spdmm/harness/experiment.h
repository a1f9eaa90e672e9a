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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "spdmm/engine.h"
#include "spdmm/harness/templates.h"
#include "spdmm/metrics.h"

namespace spdmm::harness {

enum class Timing {
  kWall,  // monotonic clock around each generation
  kOff,   // times recorded as zero; CSV output is byte-reproducible
};

struct ExperimentConfig {
  std::filesystem::path target_model;
  std::filesystem::path draft_model;
  bool draft_uses_image = false;
  std::vector<int> gammas{3, 5};
  DecodeMode mode = DecodeMode::kGreedy;
  int max_new_tokens = 64;
  std::uint64_t seed = 0;
  std::filesystem::path dataset;
  TemplateId template_id = TemplateId::kRaw;
  double cost_c = 115.0 / 7000.0;
  bool stop_on_eos = true;
  Timing timing = Timing::kWall;

  // Checks value ranges and that every referenced file exists.
  void validate() const;
};

// Relative paths inside the file resolve against the file's directory.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig config_from_json(const std::string& text, const std::filesystem::path& base_dir);

struct GammaSummary {
  int gamma = 0;
  metrics::AggregateMetrics aggregate;
  // Greedy mode only: prompts whose SPD output equals the baseline output.
  std::optional<std::size_t> baseline_matches;
};

struct RunReport {
  std::vector<metrics::PromptMetrics> rows;  // sorted by (prompt_id, gamma)
  std::vector<GammaSummary> per_gamma;
};

inline constexpr const char* kCsvHeader =
    "prompt_id,gamma,mode,tokens,target_calls,tau,mbsu,mbsu_paper_formula,wall_time_s";

// Runs baseline then SPD per prompt and gamma. Does not touch the filesystem
// beyond reading models and the dataset.
RunReport run_experiment(const ExperimentConfig& cfg);

std::string report_csv(const RunReport& report);
std::string report_json(const ExperimentConfig& cfg, const RunReport& report);

// Writes report.csv and aggregate.json under out_dir; removes both if any
// step fails.
RunReport run_experiment_to_dir(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

struct TrainOptions {
  int target_order = 3;
  int draft_order = 2;
  double target_alpha = 0.01;
  double draft_alpha = 0.01;
};

struct TrainedPaths {
  std::filesystem::path target;
  std::filesystem::path draft;
};

// Each non-empty corpus line becomes one training sequence terminated by EOS.
std::vector<TokenSeq> load_corpus(const std::filesystem::path& path, const CharTokenizer& tok);

TrainedPaths train_models(const std::filesystem::path& corpus, const TrainOptions& opts,
                          const std::filesystem::path& out_dir);

// Generated text for one prompt with accepted draft runs shown as [a:...],
// target corrections as [c:x] and bonus tokens as [b:x].
std::string qualitative_trace(const ExperimentConfig& cfg, const std::string& prompt_id,
                              std::optional<int> gamma = std::nullopt);

}  // namespace spdmm::harness
