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

namespace spdmm::harness {

// Character-level tokenizer over a fixed alphabet: EOS, newline, then the
// printable ASCII range ' '..'~'.
class CharTokenizer {
 public:
  static constexpr TokenId kEos = 0;
  static constexpr TokenId kNewline = 1;
  static constexpr TokenId kFirstPrintable = 2;

  Vocab vocab() const { return Vocab(size(), kEos); }
  static constexpr std::size_t size() { return 2 + ('~' - ' ' + 1); }

  bool can_encode(char c) const { return c == '\n' || (c >= ' ' && c <= '~'); }
  // Throws InvalidArgument on characters outside the alphabet.
  TokenSeq encode(std::string_view text) const;
  // EOS decodes to nothing unless `show_eos`, which renders it as "<eos>".
  std::string decode(std::span<const TokenId> tokens, bool show_eos = false) const;
  std::string piece(TokenId t, bool show_eos = false) const;
};

}  // namespace spdmm::harness
