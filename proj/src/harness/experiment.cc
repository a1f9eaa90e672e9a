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


#include "spdmm/harness/experiment.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "spdmm/models.h"

namespace spdmm::harness {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Per-prompt seed that does not depend on dataset order.
std::uint64_t prompt_seed(std::uint64_t seed, const std::string& prompt_id) {
  return RngState(seed, fnv1a(prompt_id)).next_u64();
}

std::string timing_name(Timing t) { return t == Timing::kWall ? "wall" : "off"; }

Timing parse_timing(const std::string& s) {
  if (s == "wall") return Timing::kWall;
  if (s == "off") return Timing::kOff;
  throw SpdError(ErrorCode::kInvalidArgument, "unknown timing '" + s + "'");
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

struct LoadedRun {
  CharTokenizer tokenizer;
  std::shared_ptr<NgramLm> target_model;
  std::shared_ptr<NgramLm> draft_model;
  std::vector<PromptRecord> records;
};

LoadedRun load_run(const ExperimentConfig& cfg) {
  cfg.validate();
  LoadedRun run;
  run.target_model = load_ngram(cfg.target_model);
  run.draft_model = load_ngram(cfg.draft_model);
  const Vocab vocab = run.tokenizer.vocab();
  if (!(run.target_model->vocab() == vocab) || !(run.draft_model->vocab() == vocab)) {
    throw SpdError(ErrorCode::kFormat, "model vocabulary does not match the tokenizer");
  }
  run.records = load_dataset(cfg.dataset);
  return run;
}

ConditionedLm make_draft(const ExperimentConfig& cfg, std::shared_ptr<const NgramLm> model) {
  return cfg.draft_uses_image ? make_target(std::move(model)) : make_text_draft(std::move(model));
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SpdError(ErrorCode::kIoError, "cannot write " + path.string());
  out << content;
  if (!out) throw SpdError(ErrorCode::kIoError, "write failed for " + path.string());
}

}  // namespace

void ExperimentConfig::validate() const {
  for (const auto* p : {&target_model, &draft_model, &dataset}) {
    if (p->empty() || !fs::is_regular_file(*p)) {
      throw SpdError(ErrorCode::kIoError, "cannot resolve file '" + p->string() + "'");
    }
  }
  if (gammas.empty()) throw SpdError(ErrorCode::kInvalidArgument, "gammas is empty");
  for (const int g : gammas) {
    if (g < 1) throw SpdError(ErrorCode::kInvalidArgument, "gamma must be >= 1");
  }
  if (max_new_tokens < 1) {
    throw SpdError(ErrorCode::kInvalidArgument, "max_new_tokens must be >= 1");
  }
  metrics::CostModel{cost_c};
}

ExperimentConfig config_from_json(const std::string& text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SpdError(ErrorCode::kFormat, std::string("config is not JSON: ") + e.what());
  }
  static const std::set<std::string> known{
      "target_model", "draft_model", "draft_uses_image", "gammas",  "mode",        "max_new_tokens",
      "seed",         "dataset",     "template",         "cost_c",  "stop_on_eos", "timing"};
  for (const auto& [key, value] : doc.items()) {
    if (!known.contains(key)) {
      throw SpdError(ErrorCode::kFormat, "unknown config key '" + key + "'");
    }
  }
  auto resolve = [&](const std::string& key) -> fs::path {
    if (!doc.contains(key)) throw SpdError(ErrorCode::kMissingField, "config needs '" + key + "'");
    fs::path p = doc.at(key).get<std::string>();
    return p.is_absolute() ? p : base_dir / p;
  };
  ExperimentConfig cfg;
  try {
    cfg.target_model = resolve("target_model");
    cfg.draft_model = resolve("draft_model");
    cfg.dataset = resolve("dataset");
    cfg.draft_uses_image = doc.value("draft_uses_image", cfg.draft_uses_image);
    cfg.gammas = doc.value("gammas", cfg.gammas);
    cfg.mode = parse_decode_mode(doc.value("mode", std::string("greedy")));
    cfg.max_new_tokens = doc.value("max_new_tokens", cfg.max_new_tokens);
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.template_id = parse_template_id(doc.value("template", std::string("raw")));
    cfg.cost_c = doc.value("cost_c", cfg.cost_c);
    cfg.stop_on_eos = doc.value("stop_on_eos", cfg.stop_on_eos);
    cfg.timing = parse_timing(doc.value("timing", std::string("wall")));
  } catch (const json::exception& e) {
    throw SpdError(ErrorCode::kFormat, std::string("bad config value: ") + e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SpdError(ErrorCode::kIoError, "cannot read config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return config_from_json(buf.str(), path.parent_path());
}

RunReport run_experiment(const ExperimentConfig& cfg) {
  const LoadedRun run = load_run(cfg);
  const ConditionedLm target = make_target(run.target_model);
  const ConditionedLm draft = make_draft(cfg, run.draft_model);
  const metrics::CostModel cost(cfg.cost_c);
  const Vocab vocab = run.tokenizer.vocab();

  std::vector<std::pair<std::string, MultimodalPrompt>> prompts;
  prompts.reserve(run.records.size());
  for (const auto& rec : run.records) {
    const RenderedPrompt rendered = render_template(cfg.template_id, rec, run.tokenizer);
    prompts.emplace_back(rec.id, to_multimodal_prompt(rec, rendered, vocab));
  }

  std::vector<int> gammas = cfg.gammas;
  std::sort(gammas.begin(), gammas.end());
  gammas.erase(std::unique(gammas.begin(), gammas.end()), gammas.end());

  RunReport report;
  for (const int gamma : gammas) {
    SpdConfig spd_cfg{gamma, cfg.mode, cfg.max_new_tokens, cfg.stop_on_eos};
    std::vector<metrics::PromptMetrics> rows;
    std::size_t matches = 0;
    for (const auto& [id, prompt] : prompts) {
      const std::uint64_t seed = prompt_seed(cfg.seed, id);

      auto start = std::chrono::steady_clock::now();
      const ArResult base = autoregressive_generate(target, prompt, cfg.max_new_tokens, cfg.mode,
                                                    RngState(seed, RngStream::kBaseline),
                                                    cfg.stop_on_eos);
      const double ar_time = cfg.timing == Timing::kWall ? seconds_since(start) : 0.0;

      start = std::chrono::steady_clock::now();
      const SpdResult spd = spd_generate(target, draft, prompt, spd_cfg, SpdRng::from_seed(seed));
      const double spd_time = cfg.timing == Timing::kWall ? seconds_since(start) : 0.0;

      if (spd.tokens == base.tokens) ++matches;
      metrics::PromptMetrics row;
      row.prompt_id = id;
      row.gamma = gamma;
      row.mode = cfg.mode;
      row.tokens = spd.tokens.size();
      row.target_calls = spd.trace.target_calls;
      row.tau = metrics::block_efficiency(spd.trace);
      row.mbsu = metrics::mbsu(row.tau, gamma, cost);
      row.mbsu_paper = metrics::mbsu_paper_formula(row.tau, gamma, cost);
      row.wall_time_s = spd_time;
      row.ar_tokens = base.tokens.size();
      row.ar_wall_time_s = ar_time;
      rows.push_back(std::move(row));
    }
    GammaSummary summary;
    summary.gamma = gamma;
    summary.aggregate = metrics::aggregate(rows);
    if (cfg.mode == DecodeMode::kGreedy) summary.baseline_matches = matches;
    report.per_gamma.push_back(summary);
    report.rows.insert(report.rows.end(), rows.begin(), rows.end());
  }
  std::stable_sort(report.rows.begin(), report.rows.end(), [](const auto& a, const auto& b) {
    return a.prompt_id != b.prompt_id ? a.prompt_id < b.prompt_id : a.gamma < b.gamma;
  });
  return report;
}

std::string report_csv(const RunReport& report) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : report.rows) {
    out += csv_field(r.prompt_id) + "," + std::to_string(r.gamma) + "," +
           std::string(decode_mode_name(r.mode)) + "," + std::to_string(r.tokens) + "," +
           std::to_string(r.target_calls) + "," + format_double(r.tau) + "," +
           format_double(r.mbsu) + "," + format_double(r.mbsu_paper) + "," +
           format_double(r.wall_time_s) + "\n";
  }
  return out;
}

std::string report_json(const ExperimentConfig& cfg, const RunReport& report) {
  json config{
      {"target_model", cfg.target_model.stem().string()},
      {"draft_model", cfg.draft_model.stem().string()},
      {"draft_uses_image", cfg.draft_uses_image},
      {"gammas", cfg.gammas},
      {"mode", std::string(decode_mode_name(cfg.mode))},
      {"max_new_tokens", cfg.max_new_tokens},
      {"seed", cfg.seed},
      {"dataset", cfg.dataset.filename().string()},
      {"template", std::string(template_name(cfg.template_id))},
      {"cost_c", cfg.cost_c},
      {"stop_on_eos", cfg.stop_on_eos},
      {"timing", timing_name(cfg.timing)},
  };
  json per_gamma = json::array();
  for (const auto& g : report.per_gamma) {
    const auto& a = g.aggregate;
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    per_gamma.push_back({
        {"gamma", g.gamma},
        {"prompts", a.prompts},
        {"mean_tau", a.mean_tau},
        {"mean_mbsu", a.mean_mbsu},
        {"mean_mbsu_paper_formula", a.mean_mbsu_paper},
        {"token_rate_ratio", opt(a.token_rate_ratio)},
        {"spd_token_rate", opt(a.spd_token_rate)},
        {"ar_token_rate", opt(a.ar_token_rate)},
        {"spd_tokens", a.spd_tokens},
        {"ar_tokens", a.ar_tokens},
        {"baseline_matches", g.baseline_matches ? json(*g.baseline_matches) : json(nullptr)},
    });
  }
  return json{{"config", config}, {"per_gamma", per_gamma}}.dump(2) + "\n";
}

RunReport run_experiment_to_dir(const ExperimentConfig& cfg, const fs::path& out_dir) {
  const fs::path csv = out_dir / "report.csv";
  const fs::path agg = out_dir / "aggregate.json";
  try {
    RunReport report = run_experiment(cfg);
    fs::create_directories(out_dir);
    write_file(csv, report_csv(report));
    write_file(agg, report_json(cfg, report));
    return report;
  } catch (...) {
    std::error_code ec;
    fs::remove(csv, ec);
    fs::remove(agg, ec);
    throw;
  }
}

std::vector<TokenSeq> load_corpus(const fs::path& path, const CharTokenizer& tok) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SpdError(ErrorCode::kIoError, "cannot read corpus " + path.string());
  std::vector<TokenSeq> corpus;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    // Literal "\n" in a corpus line stands for an embedded newline.
    std::string text;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '\\' && i + 1 < line.size() && line[i + 1] == 'n') {
        text += '\n';
        ++i;
      } else {
        text += line[i];
      }
    }
    try {
      TokenSeq seq = tok.encode(text);
      seq.push_back(CharTokenizer::kEos);
      corpus.push_back(std::move(seq));
    } catch (const SpdError& e) {
      throw SpdError(ErrorCode::kFormat, path.string() + ":" + std::to_string(lineno) + ": " +
                                             e.what());
    }
  }
  if (corpus.empty()) throw SpdError(ErrorCode::kEmptyCorpus, "corpus " + path.string() + " is empty");
  return corpus;
}

TrainedPaths train_models(const fs::path& corpus_path, const TrainOptions& opts,
                          const fs::path& out_dir) {
  const CharTokenizer tok;
  const auto corpus = load_corpus(corpus_path, tok);
  const auto target = train_ngram(corpus, tok.vocab(), opts.target_order, opts.target_alpha);
  const auto draft = train_ngram(corpus, tok.vocab(), opts.draft_order, opts.draft_alpha);
  TrainedPaths paths{out_dir / "target.json", out_dir / "draft.json"};
  try {
    fs::create_directories(out_dir);
    save_ngram(*target, paths.target);
    save_ngram(*draft, paths.draft);
  } catch (...) {
    std::error_code ec;
    fs::remove(paths.target, ec);
    fs::remove(paths.draft, ec);
    throw;
  }
  return paths;
}

std::string qualitative_trace(const ExperimentConfig& cfg, const std::string& prompt_id,
                              std::optional<int> gamma) {
  const LoadedRun run = load_run(cfg);
  const auto it = std::find_if(run.records.begin(), run.records.end(),
                               [&](const PromptRecord& r) { return r.id == prompt_id; });
  if (it == run.records.end()) {
    throw SpdError(ErrorCode::kUnknownPrompt, "no prompt with id '" + prompt_id + "'");
  }
  const ConditionedLm target = make_target(run.target_model);
  const ConditionedLm draft = make_draft(cfg, run.draft_model);
  const RenderedPrompt rendered = render_template(cfg.template_id, *it, run.tokenizer);
  const MultimodalPrompt prompt = to_multimodal_prompt(*it, rendered, run.tokenizer.vocab());
  const int g = gamma.value_or(cfg.gammas.front());
  const SpdConfig spd_cfg{g, cfg.mode, cfg.max_new_tokens, cfg.stop_on_eos};
  const SpdResult spd =
      spd_generate(target, draft, prompt, spd_cfg, SpdRng::from_seed(prompt_seed(cfg.seed, prompt_id)));

  auto show = [&](TokenId t) {
    std::string s = run.tokenizer.piece(t, /*show_eos=*/true);
    return s == "\n" ? std::string("\\n") : s;
  };
  std::string annotated;
  std::size_t accepted_total = 0;
  for (const BlockRecord& b : spd.trace.blocks) {
    const auto accepted = static_cast<std::size_t>(
        std::count(b.accepted_flags.begin(), b.accepted_flags.end(), true));
    const std::size_t shown_accepted = std::min(accepted, b.appended);
    if (shown_accepted > 0) {
      annotated += "[a:";
      for (std::size_t i = 0; i < shown_accepted; ++i) annotated += show(b.emitted[i]);
      annotated += "]";
      accepted_total += shown_accepted;
    }
    if (b.appended > accepted) {
      annotated += b.correction_kind == CorrectionKind::kBonus ? "[b:" : "[c:";
      annotated += show(b.emitted[accepted]) + "]";
    }
  }
  std::ostringstream out;
  out << "prompt: " << prompt_id << "\n"
      << "gamma: " << g << "  mode: " << decode_mode_name(cfg.mode)
      << "  blocks: " << spd.trace.target_calls << "  tokens: " << spd.tokens.size()
      << "  accepted: " << accepted_total << "\n"
      << "text: " << run.tokenizer.decode(spd.tokens) << "\n"
      << "annotated: " << annotated << "\n";
  return out.str();
}

}  // namespace spdmm::harness
