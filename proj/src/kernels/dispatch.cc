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


#include <atomic>
#include <cstdlib>
#include <string>

#include "spdmm/kernels.h"

namespace spdmm::kernels {

#ifndef SPDMM_HAVE_AVX2
const KernelTable* avx2_table() { return nullptr; }
#endif

bool cpu_has_avx2() {
#if defined(SPDMM_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

namespace {

Isa initial_isa() {
  if (const char* env = std::getenv("SPDMM_ISA")) {
    if (std::string(env) == "scalar") return Isa::kScalar;
  }
  return avx2_table() != nullptr ? Isa::kAvx2 : Isa::kScalar;
}

std::atomic<Isa>& isa_slot() {
  static std::atomic<Isa> slot{initial_isa()};
  return slot;
}

}  // namespace

const KernelTable& active() {
  if (isa_slot().load(std::memory_order_relaxed) == Isa::kAvx2) {
    return *avx2_table();
  }
  return scalar_table();
}

Isa active_isa() { return isa_slot().load(std::memory_order_relaxed); }

bool set_active_isa(Isa isa) {
  if (isa == Isa::kAvx2 && avx2_table() == nullptr) return false;
  isa_slot().store(isa, std::memory_order_relaxed);
  return true;
}

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
  }
  return "unknown";
}

}  // namespace spdmm::kernels
