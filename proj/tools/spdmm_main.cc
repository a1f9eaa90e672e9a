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


// spdmm: train n-gram target/draft models, run speculative-decoding sweeps,
// and print annotated traces.

#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "spdmm/harness/experiment.h"
#include "spdmm/kernels.h"

namespace {

using spdmm::harness::ExperimentConfig;

ExperimentConfig resolve_config(const std::string& path, const std::optional<std::uint64_t>& seed,
                                const std::optional<int>& gamma) {
  ExperimentConfig cfg = spdmm::harness::load_config(path);
  if (seed) cfg.seed = *seed;
  if (gamma) cfg.gammas = {*gamma};
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Speculative decoding with a multimodal target and a text-only draft"};
  app.require_subcommand(1);

  std::string corpus;
  std::string out_dir;
  spdmm::harness::TrainOptions train_opts;
  std::string train_config;
  auto* train = app.add_subcommand("train", "Train target and draft n-gram models");
  train->add_option("--corpus", corpus, "Text corpus, one sequence per line");
  train->add_option("--config", train_config,
                    "JSON with corpus, target_order, draft_order, target_alpha, draft_alpha");
  train->add_option("--target-order", train_opts.target_order)->check(CLI::PositiveNumber);
  train->add_option("--draft-order", train_opts.draft_order)->check(CLI::PositiveNumber);
  train->add_option("--target-alpha", train_opts.target_alpha);
  train->add_option("--draft-alpha", train_opts.draft_alpha);
  train->add_option("--out", out_dir, "Output directory")->required();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> gamma;
  auto* run = app.add_subcommand("run", "Run the baseline and speculative decoding sweep");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--out", out_dir, "Output directory for report.csv and aggregate.json")
      ->required();
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--gamma", gamma, "Restrict the sweep to one block size")
      ->check(CLI::PositiveNumber);

  std::string prompt_id;
  auto* trace = app.add_subcommand("trace", "Print one generation with acceptance markers");
  trace->add_option("--config", config_path, "Experiment config (JSON)")->required();
  trace->add_option("--prompt", prompt_id, "Prompt id from the dataset")->required();
  trace->add_option("--seed", seed, "Override the config seed");
  trace->add_option("--gamma", gamma, "Block size (defaults to the first configured)")
      ->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      if (!train_config.empty()) {
        std::ifstream in(train_config);
        if (!in) throw spdmm::SpdError(spdmm::ErrorCode::kIoError, "cannot read " + train_config);
        const auto doc = nlohmann::json::parse(in);
        const std::filesystem::path base = std::filesystem::path(train_config).parent_path();
        if (corpus.empty() && doc.contains("corpus")) {
          std::filesystem::path p = doc.at("corpus").get<std::string>();
          corpus = (p.is_absolute() ? p : base / p).string();
        }
        train_opts.target_order = doc.value("target_order", train_opts.target_order);
        train_opts.draft_order = doc.value("draft_order", train_opts.draft_order);
        train_opts.target_alpha = doc.value("target_alpha", train_opts.target_alpha);
        train_opts.draft_alpha = doc.value("draft_alpha", train_opts.draft_alpha);
      }
      if (corpus.empty()) {
        std::cerr << "train: --corpus (or a config with 'corpus') is required\n";
        return 2;
      }
      const auto paths = spdmm::harness::train_models(corpus, train_opts, out_dir);
      std::cout << "wrote " << paths.target.string() << "\n"
                << "wrote " << paths.draft.string() << "\n";
    } else if (*run) {
      const ExperimentConfig cfg = resolve_config(config_path, seed, gamma);
      const auto report = spdmm::harness::run_experiment_to_dir(cfg, out_dir);
      std::cout << "kernels: " << spdmm::kernels::isa_name(spdmm::kernels::active_isa()) << "\n";
      for (const auto& g : report.per_gamma) {
        std::cout << "gamma=" << g.gamma << " prompts=" << g.aggregate.prompts
                  << " mean_tau=" << g.aggregate.mean_tau
                  << " mean_mbsu=" << g.aggregate.mean_mbsu;
        if (g.aggregate.token_rate_ratio) {
          std::cout << " token_rate_ratio=" << *g.aggregate.token_rate_ratio;
        }
        std::cout << "\n";
      }
      std::cout << "wrote " << (std::filesystem::path(out_dir) / "report.csv").string() << "\n";
    } else if (*trace) {
      const ExperimentConfig cfg = resolve_config(config_path, seed, std::nullopt);
      std::cout << spdmm::harness::qualitative_trace(cfg, prompt_id, gamma);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
