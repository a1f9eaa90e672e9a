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


#include "spdmm/harness/templates.h"

#include <string>

namespace spdmm::harness {

namespace {

struct InContextExample {
  std::string_view question;
  std::string_view options[3];
  std::string_view context;
  std::string_view answer;
  std::string_view lecture;
  std::string_view explanation;
};

// Text-only worked example placed ahead of the test question.
constexpr InContextExample kScienceQaExample{
    "Which tense does the sentence use? Mona will print her favorite book.",
    {"future tense", "present tense", "past tense"},
    "The sentence describes a plan.",
    "(0)",
    "Present tense verbs tell you about something that is happening now. Future tense "
    "verbs tell you about something that is going to happen.",
    "The verb will print tells you about something that is going to happen.",
};

void require(const std::optional<std::string>& field, const char* name) {
  if (!field || field->empty()) {
    throw SpdError(ErrorCode::kMissingField, std::string("template needs '") + name + "'");
  }
}

void forbid(bool present, const char* name, TemplateId id) {
  if (present) {
    throw SpdError(ErrorCode::kInvalidArgument,
                   std::string("field '") + name + "' is not used by template '" +
                       std::string(template_name(id)) + "'");
  }
}

template <typename Options>
std::string options_line(const Options& options) {
  std::string line = "Options:";
  std::size_t i = 0;
  for (const auto& opt : options) {
    line += " (" + std::to_string(i++) + ") option : " + std::string(opt);
  }
  return line;
}

std::string chat_prompt(std::string_view user_turn) {
  return std::string(kChatSystemPrompt) + "  USER: " + std::string(kImageMarker) + "\n" +
         std::string(user_turn) + "  ASSISTANT:";
}

std::string science_qa_prompt(const PromptRecord& r) {
  const auto& ex = kScienceQaExample;
  std::string s;
  s += "Question: question : " + std::string(ex.question) + "\n";
  s += options_line(ex.options) + "\n";
  s += "Context: context : " + std::string(ex.context) + "\n";
  s += std::string(kScienceQaAnswerCue) + " " + std::string(ex.answer) + ". BECAUSE: lecture " +
       std::string(ex.lecture) + " explanation : " + std::string(ex.explanation) + "\n";
  s += "\n";
  s += std::string(kImageMarker) + "\n";
  s += "Question: question : " + *r.question + "\n";
  s += options_line(*r.options) + "\n";
  s += "Context: context : " + *r.context + "\n";
  s += std::string(kScienceQaAnswerCue);
  return s;
}

}  // namespace

TemplateId parse_template_id(std::string_view name) {
  if (name == "raw") return TemplateId::kRaw;
  if (name == "llava-chat") return TemplateId::kLlavaChat;
  if (name == "coco-caption") return TemplateId::kCocoCaption;
  if (name == "scienceqa") return TemplateId::kScienceQa;
  throw SpdError(ErrorCode::kInvalidArgument, "unknown template '" + std::string(name) + "'");
}

std::string_view template_name(TemplateId id) {
  switch (id) {
    case TemplateId::kRaw: return "raw";
    case TemplateId::kLlavaChat: return "llava-chat";
    case TemplateId::kCocoCaption: return "coco-caption";
    case TemplateId::kScienceQa: return "scienceqa";
  }
  return "unknown";
}

RenderedPrompt render_template(TemplateId id, const PromptRecord& record,
                               const CharTokenizer& tokenizer) {
  const bool has_prompt = record.prompt_text.has_value() || record.tokens.has_value();
  std::string text;
  switch (id) {
    case TemplateId::kRaw: {
      forbid(record.question.has_value(), "question", id);
      forbid(record.options.has_value(), "options", id);
      forbid(record.context.has_value(), "context", id);
      if (record.prompt_text.has_value() == record.tokens.has_value()) {
        throw SpdError(ErrorCode::kMissingField,
                       "raw template needs exactly one of 'prompt_text' or 'tokens'");
      }
      if (record.tokens) {
        if (record.tokens->empty()) {
          throw SpdError(ErrorCode::kMissingField, "template needs non-empty 'tokens'");
        }
        return RenderedPrompt{tokenizer.decode(*record.tokens), *record.tokens, 0};
      }
      require(record.prompt_text, "prompt_text");
      text = *record.prompt_text;
      break;
    }
    case TemplateId::kLlavaChat:
      forbid(has_prompt, "prompt_text/tokens", id);
      forbid(record.options.has_value(), "options", id);
      forbid(record.context.has_value(), "context", id);
      require(record.question, "question");
      text = chat_prompt(*record.question);
      break;
    case TemplateId::kCocoCaption:
      forbid(has_prompt, "prompt_text/tokens", id);
      forbid(record.question.has_value(), "question", id);
      forbid(record.options.has_value(), "options", id);
      forbid(record.context.has_value(), "context", id);
      text = chat_prompt(kCaptionRequest);
      break;
    case TemplateId::kScienceQa:
      forbid(has_prompt, "prompt_text/tokens", id);
      require(record.question, "question");
      if (!record.options || record.options->empty()) {
        throw SpdError(ErrorCode::kMissingField, "template needs 'options'");
      }
      if (!record.context) {
        throw SpdError(ErrorCode::kMissingField, "template needs 'context'");
      }
      text = science_qa_prompt(record);
      break;
  }

  std::size_t image_pos = 0;
  if (const auto at = text.find(kImageMarker); at != std::string::npos) {
    text.erase(at, kImageMarker.size());
    image_pos = at;  // one token per character
  }
  TokenSeq tokens = tokenizer.encode(text);
  return RenderedPrompt{std::move(text), std::move(tokens), image_pos};
}

MultimodalPrompt to_multimodal_prompt(const PromptRecord& record, const RenderedPrompt& rendered,
                                      const Vocab& vocab) {
  for (const TokenId t : record.image_ctx) {
    if (!vocab.contains(t)) {
      throw SpdError(ErrorCode::kInvalidArgument, "image_ctx token " + std::to_string(t) +
                                                      " outside vocab in record '" + record.id +
                                                      "'");
    }
  }
  for (const TokenId t : rendered.tokens) {
    if (!vocab.contains(t)) {
      throw SpdError(ErrorCode::kInvalidArgument,
                     "prompt token " + std::to_string(t) + " outside vocab in record '" +
                         record.id + "'");
    }
  }
  return MultimodalPrompt(record.image_ctx, rendered.tokens);
}

}  // namespace spdmm::harness
