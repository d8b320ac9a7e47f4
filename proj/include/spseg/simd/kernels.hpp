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

#pragma once

#include <cstddef>

// Dense inner loops used by the autodiff engine, the affinity builder and
// mean-shift. Every kernel has a scalar reference implementation; on x86-64
// an AVX2+FMA variant is selected at startup when the CPU supports it.
// Setting SPSEG_SIMD=scalar in the environment forces the reference path.
//
// All matrices are row-major and contiguous.

namespace spseg::simd {

struct KernelTable {
  const char* name;

  // c[m x n] (+)= a[m x k] * b[k x n]. When accumulate is false c is
  // overwritten.
  void (*gemm)(std::size_t m, std::size_t n, std::size_t k, const double* a,
               const double* b, double* c, bool accumulate);

  double (*dot)(const double* x, const double* y, std::size_t n);

  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

  // out[r] = || x - y[r, :] ||^2 for r in [0, rows)
  void (*sq_dist_rows)(const double* x, const double* y, std::size_t rows,
                       std::size_t dim, double* out);
};

const KernelTable& scalar_kernels();

// nullptr when the variant was not compiled in or the CPU lacks AVX2/FMA.
const KernelTable* avx2_kernels();

// Kernel table used by the library.
const KernelTable& active();

// Replaces the active table for the lifetime of the guard. Test-only hook for
// running the same computation through different variants.
class ScopedKernelOverride {
 public:
  explicit ScopedKernelOverride(const KernelTable& table);
  ~ScopedKernelOverride();
  ScopedKernelOverride(const ScopedKernelOverride&) = delete;
  ScopedKernelOverride& operator=(const ScopedKernelOverride&) = delete;

 private:
  const KernelTable* previous_;
};

}  // namespace spseg::simd
