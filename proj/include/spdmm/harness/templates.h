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

#include <string>
#include <string_view>

#include "spdmm/core.h"
#include "spdmm/harness/dataset.h"
#include "spdmm/harness/tokenizer.h"

namespace spdmm::harness {

enum class TemplateId {
  kRaw,          // prompt_text or tokens, verbatim
  kLlavaChat,    // chat system prompt with a user question
  kCocoCaption,  // chat system prompt with the fixed captioning request
  kScienceQa,    // one in-context example, then question / options / context
};

TemplateId parse_template_id(std::string_view name);
std::string_view template_name(TemplateId id);

inline constexpr std::string_view kImageMarker = "<image>";

inline constexpr std::string_view kChatSystemPrompt =
    "A chat between a curious user and an artificial intelligence assistant. "
    "The assistant gives helpful, detailed, and polite answers to the user's questions.";

inline constexpr std::string_view kCaptionRequest =
    "Provide a detailed description of the given image";

inline constexpr std::string_view kScienceQaAnswerCue = "Answer: The answer is";

struct RenderedPrompt {
  std::string text;        // template output with the image marker removed
  TokenSeq tokens;         // tokenized text
  std::size_t image_pos;   // token index where the image marker stood
};

// Throws MissingField when a field the template needs is absent or empty,
// InvalidArgument when the record carries fields the template does not use.
RenderedPrompt render_template(TemplateId id, const PromptRecord& record,
                               const CharTokenizer& tokenizer);

// Image context first, then the rendered text.
MultimodalPrompt to_multimodal_prompt(const PromptRecord& record, const RenderedPrompt& rendered,
                                      const Vocab& vocab);

}  // namespace spdmm::harness
