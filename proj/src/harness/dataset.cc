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


#include "spdmm/harness/dataset.h"

#include <fstream>
#include <set>

#include "json.hpp"

namespace spdmm::harness {

namespace {

using nlohmann::json;

template <typename T>
std::optional<T> optional_field(const json& doc, const char* key) {
  if (!doc.contains(key) || doc.at(key).is_null()) return std::nullopt;
  return doc.at(key).get<T>();
}

}  // namespace

PromptRecord parse_prompt_record(const std::string& json_line) {
  json doc;
  try {
    doc = json::parse(json_line);
  } catch (const json::parse_error& e) {
    throw SpdError(ErrorCode::kFormat, std::string("dataset line is not JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SpdError(ErrorCode::kFormat, "dataset line is not an object");
  PromptRecord r;
  try {
    if (!doc.contains("id")) throw SpdError(ErrorCode::kMissingField, "record needs 'id'");
    r.id = doc.at("id").get<std::string>();
    r.image_ctx = optional_field<TokenSeq>(doc, "image_ctx").value_or(TokenSeq{});
    r.prompt_text = optional_field<std::string>(doc, "prompt_text");
    r.tokens = optional_field<TokenSeq>(doc, "tokens");
    r.question = optional_field<std::string>(doc, "question");
    r.options = optional_field<std::vector<std::string>>(doc, "options");
    r.context = optional_field<std::string>(doc, "context");
  } catch (const json::exception& e) {
    throw SpdError(ErrorCode::kFormat, std::string("bad dataset field: ") + e.what());
  }
  if (r.id.empty()) throw SpdError(ErrorCode::kMissingField, "record 'id' is empty");
  return r;
}

std::vector<PromptRecord> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SpdError(ErrorCode::kIoError, "cannot read dataset " + path.string());
  std::vector<PromptRecord> records;
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    PromptRecord r;
    try {
      r = parse_prompt_record(line);
    } catch (const SpdError& e) {
      throw SpdError(e.code(), path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (!seen.insert(r.id).second) {
      throw SpdError(ErrorCode::kFormat, "duplicate prompt id '" + r.id + "'");
    }
    records.push_back(std::move(r));
  }
  if (records.empty()) throw SpdError(ErrorCode::kEmpty, "dataset has no records");
  return records;
}

}  // namespace spdmm::harness
