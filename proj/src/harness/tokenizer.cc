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


#include "spdmm/harness/tokenizer.h"

namespace spdmm::harness {

TokenSeq CharTokenizer::encode(std::string_view text) const {
  TokenSeq out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '\n') {
      out.push_back(kNewline);
    } else if (c >= ' ' && c <= '~') {
      out.push_back(kFirstPrintable + static_cast<TokenId>(c - ' '));
    } else {
      throw SpdError(ErrorCode::kInvalidArgument,
                     "character at offset " + std::to_string(i) + " is outside the alphabet");
    }
  }
  return out;
}

std::string CharTokenizer::piece(TokenId t, bool show_eos) const {
  if (t == kEos) return show_eos ? "<eos>" : "";
  if (t == kNewline) return "\n";
  if (t >= kFirstPrintable && static_cast<std::size_t>(t) < size()) {
    return std::string(1, static_cast<char>(' ' + (t - kFirstPrintable)));
  }
  throw SpdError(ErrorCode::kInvalidArgument, "token " + std::to_string(t) + " outside vocab");
}

std::string CharTokenizer::decode(std::span<const TokenId> tokens, bool show_eos) const {
  std::string out;
  for (const TokenId t : tokens) out += piece(t, show_eos);
  return out;
}

}  // namespace spdmm::harness
