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


#include <fstream>
#include <sstream>

#include "json.hpp"
#include "spdmm/models.h"

namespace spdmm {

namespace {

using nlohmann::json;

constexpr const char* kFormatTag = "ngram-v1";

template <typename T>
T require(const json& doc, const char* key) {
  if (!doc.contains(key)) {
    throw SpdError(ErrorCode::kFormat, std::string("model file missing '") + key + "'");
  }
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw SpdError(ErrorCode::kFormat, std::string("bad '") + key + "': " + e.what());
  }
}

}  // namespace

std::string ngram_to_json(const NgramLm& model) {
  json doc;
  doc["format"] = kFormatTag;
  doc["order"] = model.order();
  doc["alpha"] = model.alpha();
  doc["vocab_size"] = model.vocab().size();
  doc["eos"] = model.vocab().eos();
  json rows = json::array();
  for (const auto& [context, row] : model.rows()) {
    rows.push_back(json::array({json(context), json(row.counts)}));
  }
  doc["counts"] = std::move(rows);
  return doc.dump();
}

std::shared_ptr<NgramLm> ngram_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SpdError(ErrorCode::kFormat, std::string("model file is not JSON: ") + e.what());
  }
  if (require<std::string>(doc, "format") != kFormatTag) {
    throw SpdError(ErrorCode::kFormat, "unsupported model format");
  }
  const Vocab vocab(require<std::size_t>(doc, "vocab_size"), require<TokenId>(doc, "eos"));
  auto model = std::make_shared<NgramLm>(vocab, require<int>(doc, "order"),
                                         require<double>(doc, "alpha"));
  for (const json& entry : require<json>(doc, "counts")) {
    if (!entry.is_array() || entry.size() != 2) {
      throw SpdError(ErrorCode::kFormat, "count entry must be [context, counts]");
    }
    const auto context = entry[0].get<NgramLm::Context>();
    const auto counts = entry[1].get<std::vector<double>>();
    if (counts.size() != vocab.size()) {
      throw SpdError(ErrorCode::kFormat, "count row length differs from vocab_size");
    }
    for (std::size_t t = 0; t < counts.size(); ++t) {
      if (counts[t] < 0.0) throw SpdError(ErrorCode::kFormat, "negative count");
      if (counts[t] > 0.0) model->add_count(context, static_cast<TokenId>(t), counts[t]);
    }
  }
  return model;
}

void save_ngram(const NgramLm& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SpdError(ErrorCode::kIoError, "cannot write " + path.string());
  out << ngram_to_json(model) << '\n';
  if (!out) throw SpdError(ErrorCode::kIoError, "write failed for " + path.string());
}

std::shared_ptr<NgramLm> load_ngram(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SpdError(ErrorCode::kIoError, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return ngram_from_json(buf.str());
}

}  // namespace spdmm
