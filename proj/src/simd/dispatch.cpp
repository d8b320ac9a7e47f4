// Copyright 2026 The spseg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdlib>
#include <cstring>

#include "spseg/simd/kernels.hpp"

namespace spseg::simd {

#if defined(SPSEG_HAVE_AVX2)
const KernelTable& avx2_kernel_table();
#endif

const KernelTable* avx2_kernels() {
#if defined(SPSEG_HAVE_AVX2)
  static const bool supported =
      __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &avx2_kernel_table() : nullptr;
#else
  return nullptr;
#endif
}

namespace {

const KernelTable* select_default() {
  const char* forced = std::getenv("SPSEG_SIMD");
  if (forced != nullptr && std::strcmp(forced, "scalar") == 0) {
    return &scalar_kernels();
  }
  if (const KernelTable* t = avx2_kernels()) return t;
  return &scalar_kernels();
}

const KernelTable*& current() {
  static const KernelTable* table = select_default();
  return table;
}

}  // namespace

const KernelTable& active() { return *current(); }

ScopedKernelOverride::ScopedKernelOverride(const KernelTable& table)
    : previous_(current()) {
  current() = &table;
}

ScopedKernelOverride::~ScopedKernelOverride() { current() = previous_; }

}  // namespace spseg::simd
