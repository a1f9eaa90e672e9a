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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "spdmm/core.h"

namespace spdmm::harness {

// One line of a JSON-lines prompt dataset.
struct PromptRecord {
  std::string id;
  TokenSeq image_ctx;
  std::optional<std::string> prompt_text;
  std::optional<TokenSeq> tokens;
  std::optional<std::string> question;
  std::optional<std::vector<std::string>> options;
  std::optional<std::string> context;
};

PromptRecord parse_prompt_record(const std::string& json_line);

// Blank lines are skipped; ids must be unique.
std::vector<PromptRecord> load_dataset(const std::filesystem::path& path);

}  // namespace spdmm::harness
