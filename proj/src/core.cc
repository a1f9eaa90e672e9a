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


#include "spdmm/core.h"

#include <cmath>
#include <string>

#include "spdmm/kernels.h"

namespace spdmm {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kAllZero: return "AllZero";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kBlockTooLong: return "BlockTooLong";
    case ErrorCode::kDraftZeroProb: return "DraftZeroProb";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kTooLarge: return "TooLarge";
    case ErrorCode::kEmptyTrace: return "EmptyTrace";
    case ErrorCode::kZeroTime: return "ZeroTime";
    case ErrorCode::kEmpty: return "Empty";
    case ErrorCode::kMissingField: return "MissingField";
    case ErrorCode::kUnknownPrompt: return "UnknownPrompt";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kFormat: return "Format";
  }
  return "Unknown";
}

Vocab::Vocab(std::size_t size, TokenId eos) : size_(size), eos_(eos) {
  if (size < 2) {
    throw SpdError(ErrorCode::kInvalidArgument, "vocab size must be >= 2");
  }
  if (!contains(eos)) {
    throw SpdError(ErrorCode::kInvalidArgument,
                   "eos " + std::to_string(eos) + " outside vocab");
  }
}

ProbDist::ProbDist(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) {
    throw SpdError(ErrorCode::kInvalidArgument, "empty distribution");
  }
  for (double v : probs_) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw SpdError(ErrorCode::kInvalidArgument,
                     "distribution entry is negative or not finite");
    }
  }
  const double total = kernels::sum(probs_);
  if (std::abs(total - 1.0) > kSumTolerance) {
    throw SpdError(ErrorCode::kInvalidArgument,
                   "distribution sums to " + std::to_string(total));
  }
}

MultimodalPrompt::MultimodalPrompt(TokenSeq image, TokenSeq txt)
    : image_ctx(std::move(image)), text(std::move(txt)) {
  if (text.empty()) {
    throw SpdError(ErrorCode::kInvalidArgument, "prompt text is empty");
  }
}

namespace {

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t RngState::next_u64() {
  const std::uint64_t key = mix64(seed_ ^ mix64(stream_ + 0x9e3779b97f4a7c15ULL));
  const std::uint64_t out = mix64(key + (counter_ + 1) * 0x9e3779b97f4a7c15ULL);
  ++counter_;
  return out;
}

double RngState::next_uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

ProbDist normalize(std::span<const double> raw) {
  for (double v : raw) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw SpdError(ErrorCode::kInvalidArgument,
                     "normalize input must be finite and non-negative");
    }
  }
  const auto& k = kernels::active();
  const double total = k.sum(raw.data(), raw.size());
  if (!(total > 0.0)) {
    throw SpdError(ErrorCode::kAllZero, "cannot normalize an all-zero vector");
  }
  std::vector<double> out(raw.size());
  k.divide(raw.data(), total, out.data(), raw.size());
  return ProbDist(std::move(out));
}

TokenId sample(const ProbDist& dist, RngState& rng) {
  const double u = rng.next_uniform();
  const auto probs = dist.probs();
  double cum = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    cum += probs[i];
    last_positive = i;
    if (u < cum) return static_cast<TokenId>(i);
  }
  // Rounding left u at or above the final cumulative mass.
  return static_cast<TokenId>(last_positive);
}

TokenId argmax(const ProbDist& dist) {
  const auto probs = dist.probs();
  return static_cast<TokenId>(kernels::active().argmax(probs.data(), probs.size()));
}

}  // namespace spdmm
