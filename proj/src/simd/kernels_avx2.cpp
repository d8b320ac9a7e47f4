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

// Compiled with -mavx2 -mfma. Nothing in this file may run before
// dispatch.cpp has confirmed CPU support.

#include <immintrin.h>

#include <algorithm>

#include "spseg/simd/kernels.hpp"

namespace spseg::simd {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// 4x8 register tile: rows i..i+3, columns j..j+7.
inline void tile_4x8(std::size_t n, std::size_t k, const double* a,
                     const double* b, double* c) {
  __m256d c00 = _mm256_loadu_pd(c + 0 * n), c01 = _mm256_loadu_pd(c + 0 * n + 4);
  __m256d c10 = _mm256_loadu_pd(c + 1 * n), c11 = _mm256_loadu_pd(c + 1 * n + 4);
  __m256d c20 = _mm256_loadu_pd(c + 2 * n), c21 = _mm256_loadu_pd(c + 2 * n + 4);
  __m256d c30 = _mm256_loadu_pd(c + 3 * n), c31 = _mm256_loadu_pd(c + 3 * n + 4);
  const double* a0 = a;
  const double* a1 = a + k;
  const double* a2 = a + 2 * k;
  const double* a3 = a + 3 * k;
  for (std::size_t p = 0; p < k; ++p) {
    const __m256d b0 = _mm256_loadu_pd(b + p * n);
    const __m256d b1 = _mm256_loadu_pd(b + p * n + 4);
    __m256d av = _mm256_broadcast_sd(a0 + p);
    c00 = _mm256_fmadd_pd(av, b0, c00);
    c01 = _mm256_fmadd_pd(av, b1, c01);
    av = _mm256_broadcast_sd(a1 + p);
    c10 = _mm256_fmadd_pd(av, b0, c10);
    c11 = _mm256_fmadd_pd(av, b1, c11);
    av = _mm256_broadcast_sd(a2 + p);
    c20 = _mm256_fmadd_pd(av, b0, c20);
    c21 = _mm256_fmadd_pd(av, b1, c21);
    av = _mm256_broadcast_sd(a3 + p);
    c30 = _mm256_fmadd_pd(av, b0, c30);
    c31 = _mm256_fmadd_pd(av, b1, c31);
  }
  _mm256_storeu_pd(c + 0 * n, c00);
  _mm256_storeu_pd(c + 0 * n + 4, c01);
  _mm256_storeu_pd(c + 1 * n, c10);
  _mm256_storeu_pd(c + 1 * n + 4, c11);
  _mm256_storeu_pd(c + 2 * n, c20);
  _mm256_storeu_pd(c + 2 * n + 4, c21);
  _mm256_storeu_pd(c + 3 * n, c30);
  _mm256_storeu_pd(c + 3 * n + 4, c31);
}

// Single row of c, vectorized over n columns; b has row stride ldb.
inline void row_kernel(std::size_t n, std::size_t k, const double* a,
                       const double* b, std::size_t ldb, double* c) {
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    __m256d acc0 = _mm256_loadu_pd(c + j);
    __m256d acc1 = _mm256_loadu_pd(c + j + 4);
    for (std::size_t p = 0; p < k; ++p) {
      const __m256d av = _mm256_broadcast_sd(a + p);
      acc0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b + p * ldb + j), acc0);
      acc1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b + p * ldb + j + 4), acc1);
    }
    _mm256_storeu_pd(c + j, acc0);
    _mm256_storeu_pd(c + j + 4, acc1);
  }
  for (; j + 4 <= n; j += 4) {
    __m256d acc = _mm256_loadu_pd(c + j);
    for (std::size_t p = 0; p < k; ++p) {
      acc = _mm256_fmadd_pd(_mm256_broadcast_sd(a + p),
                            _mm256_loadu_pd(b + p * ldb + j), acc);
    }
    _mm256_storeu_pd(c + j, acc);
  }
  for (; j < n; ++j) {
    double acc = c[j];
    for (std::size_t p = 0; p < k; ++p) acc += a[p] * b[p * ldb + j];
    c[j] = acc;
  }
}

void gemm_avx2(std::size_t m, std::size_t n, std::size_t k, const double* a,
               const double* b, double* c, bool accumulate) {
  if (!accumulate) std::fill(c, c + m * n, 0.0);
  if (k == 0) return;
  const std::size_t n8 = n - n % 8;
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    for (std::size_t j = 0; j < n8; j += 8) {
      tile_4x8(n, k, a + i * k, b + j, c + i * n + j);
    }
    if (n8 < n) {
      for (std::size_t r = 0; r < 4; ++r) {
        row_kernel(n - n8, k, a + (i + r) * k, b + n8, n, c + (i + r) * n + n8);
      }
    }
  }
  for (; i < m; ++i) row_kernel(n, k, a + i * k, b, n, c + i * n);
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i),
                                            _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void sq_dist_rows_avx2(const double* x, const double* y, std::size_t rows,
                       std::size_t dim, double* out) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* yr = y + r * dim;
    __m256d acc = _mm256_setzero_pd();
    std::size_t d = 0;
    for (; d + 4 <= dim; d += 4) {
      const __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(x + d), _mm256_loadu_pd(yr + d));
      acc = _mm256_fmadd_pd(diff, diff, acc);
    }
    double s = hsum(acc);
    for (; d < dim; ++d) {
      const double diff = x[d] - yr[d];
      s += diff * diff;
    }
    out[r] = s;
  }
}

}  // namespace

const KernelTable& avx2_kernel_table() {
  static const KernelTable table{"avx2", gemm_avx2, dot_avx2, axpy_avx2,
                                 sq_dist_rows_avx2};
  return table;
}

}  // namespace spseg::simd
