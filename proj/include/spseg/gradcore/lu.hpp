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
#include <vector>

#include "spseg/gradcore/matrix.hpp"

namespace spseg {

// Partial-pivot LU factorization P A = L U of a square matrix.
class LuFactorization {
 public:
  // Throws SingularMatrixError naming the first pivot whose magnitude is
  // <= pivot_tolerance.
  explicit LuFactorization(const Matrix& a, double pivot_tolerance = 1e-12);

  std::size_t order() const noexcept { return lu_.rows(); }

  // X with A X = B.
  Matrix solve(const Matrix& b) const;
  // X with A^T X = B.
  Matrix solve_transposed(const Matrix& b) const;

 private:
  Matrix lu_;
  std::vector<std::size_t> perm_;  // row i of P A is row perm_[i] of A
};

}  // namespace spseg
