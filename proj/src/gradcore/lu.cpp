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

#include "spseg/gradcore/lu.hpp"

#include <cmath>
#include <numeric>
#include <utility>

#include "spseg/common/error.hpp"
#include "spseg/simd/kernels.hpp"

namespace spseg {

LuFactorization::LuFactorization(const Matrix& a, double pivot_tolerance) : lu_(a) {
  if (a.rows() != a.cols()) {
    throw DimensionError("LU of non-square " + a.shape_string() + " matrix");
  }
  const std::size_t n = a.rows();
  perm_.resize(n);
  std::iota(perm_.begin(), perm_.end(), std::size_t{0});
  const auto& k = simd::active();

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    double best = std::abs(lu_(col, col));
    for (std::size_t r = col + 1; r < n; ++r) {
      const double v = std::abs(lu_(r, col));
      if (v > best) {
        best = v;
        pivot = r;
      }
    }
    if (!(best > pivot_tolerance)) throw SingularMatrixError(col, best);
    if (pivot != col) {
      std::swap(perm_[pivot], perm_[col]);
      for (std::size_t c = 0; c < n; ++c) std::swap(lu_(pivot, c), lu_(col, c));
    }
    const double inv = 1.0 / lu_(col, col);
    const std::size_t tail = n - col - 1;
    for (std::size_t r = col + 1; r < n; ++r) {
      const double factor = lu_(r, col) * inv;
      lu_(r, col) = factor;
      if (factor != 0.0 && tail > 0) {
        k.axpy(-factor, &lu_(col, col + 1), &lu_(r, col + 1), tail);
      }
    }
  }
}

Matrix LuFactorization::solve(const Matrix& b) const {
  const std::size_t n = order();
  if (b.rows() != n) {
    throw DimensionError("LU solve of order " + std::to_string(n) + " with rhs " +
                         b.shape_string());
  }
  const std::size_t m = b.cols();
  const auto& k = simd::active();
  Matrix x(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    auto src = b.row_span(perm_[i]);
    std::copy(src.begin(), src.end(), x.row_span(i).begin());
  }
  // L y = P b (unit diagonal)
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const double l = lu_(i, j);
      if (l != 0.0) k.axpy(-l, x.row_span(j).data(), x.row_span(i).data(), m);
    }
  }
  // U x = y
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double u = lu_(i, j);
      if (u != 0.0) k.axpy(-u, x.row_span(j).data(), x.row_span(i).data(), m);
    }
    const double inv = 1.0 / lu_(i, i);
    for (double& v : x.row_span(i)) v *= inv;
  }
  return x;
}

Matrix LuFactorization::solve_transposed(const Matrix& b) const {
  // A^T = U^T L^T P, so solve U^T z = b, L^T w = z, then x = P^T w.
  const std::size_t n = order();
  if (b.rows() != n) {
    throw DimensionError("LU transposed solve of order " + std::to_string(n) +
                         " with rhs " + b.shape_string());
  }
  const std::size_t m = b.cols();
  const auto& k = simd::active();
  Matrix w = b;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const double u = lu_(j, i);
      if (u != 0.0) k.axpy(-u, w.row_span(j).data(), w.row_span(i).data(), m);
    }
    const double inv = 1.0 / lu_(i, i);
    for (double& v : w.row_span(i)) v *= inv;
  }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double l = lu_(j, i);
      if (l != 0.0) k.axpy(-l, w.row_span(j).data(), w.row_span(i).data(), m);
    }
  }
  Matrix x(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    auto src = w.row_span(i);
    std::copy(src.begin(), src.end(), x.row_span(perm_[i]).begin());
  }
  return x;
}

}  // namespace spseg
