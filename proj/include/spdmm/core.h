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

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace spdmm {

using TokenId = std::int32_t;
using TokenSeq = std::vector<TokenId>;

// Reserved begin-of-sequence marker used to pad short n-gram contexts.
// Never part of a Vocab and never sampled.
inline constexpr TokenId kBeginMarker = -1;

enum class ErrorCode {
  kInvalidArgument,
  kAllZero,
  kEmptyCorpus,
  kBlockTooLong,
  kDraftZeroProb,
  kShapeMismatch,
  kTooLarge,
  kEmptyTrace,
  kZeroTime,
  kEmpty,
  kMissingField,
  kUnknownPrompt,
  kIoError,
  kFormat,
};

const char* error_code_name(ErrorCode code);

class SpdError : public std::runtime_error {
 public:
  SpdError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class Vocab {
 public:
  Vocab(std::size_t size, TokenId eos);

  std::size_t size() const noexcept { return size_; }
  TokenId eos() const noexcept { return eos_; }
  bool contains(TokenId t) const noexcept {
    return t >= 0 && static_cast<std::size_t>(t) < size_;
  }

  friend bool operator==(const Vocab&, const Vocab&) = default;

 private:
  std::size_t size_;
  TokenId eos_;
};

// Dense probability vector over a vocabulary. Entries are non-negative and
// sum to one within 1e-9; the checked constructor enforces both.
class ProbDist {
 public:
  static constexpr double kSumTolerance = 1e-9;

  explicit ProbDist(std::vector<double> probs);

  // Skips validation. Callers must already guarantee the invariants.
  static ProbDist from_trusted(std::vector<double> probs) {
    ProbDist d;
    d.probs_ = std::move(probs);
    return d;
  }

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](TokenId t) const { return probs_[static_cast<std::size_t>(t)]; }
  std::span<const double> probs() const noexcept { return probs_; }

  friend bool operator==(const ProbDist&, const ProbDist&) = default;

 private:
  ProbDist() = default;
  std::vector<double> probs_;
};

// Image context (stand-in for projected image embeddings) plus text tokens.
// A conditioning model that sees the image reads image_ctx first, then text.
struct MultimodalPrompt {
  TokenSeq image_ctx;
  TokenSeq text;

  MultimodalPrompt(TokenSeq image, TokenSeq txt);
};

enum class RngStream : std::uint64_t {
  kDraft = 1,
  kVerify = 2,
  kResample = 3,
  kBaseline = 4,
};

// Counter-based generator: draw i of (seed, stream) is a pure function of
// (seed, stream, i), so results do not depend on platform or call interleaving
// across streams.
class RngState {
 public:
  RngState(std::uint64_t seed, RngStream stream)
      : RngState(seed, static_cast<std::uint64_t>(stream)) {}
  RngState(std::uint64_t seed, std::uint64_t stream)
      : seed_(seed), stream_(stream) {}

  std::uint64_t next_u64();
  // Uniform in [0, 1) with 53 bits of precision.
  double next_uniform();

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

ProbDist normalize(std::span<const double> raw);

TokenId sample(const ProbDist& dist, RngState& rng);

// Lowest index among the maximal entries.
TokenId argmax(const ProbDist& dist);

}  // namespace spdmm
