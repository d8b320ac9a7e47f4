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
#include <span>
#include <vector>

#include "spseg/gradcore/tape.hpp"

// Differentiable operations. Every function records one node on the tape of
// its first operand and returns a handle to it.

namespace spseg::ops {

// A * B. dA = G * B^T, dB = A^T * G.
Var matmul(Var a, Var b);

// X W + b with b a 1 x cols row added to every row of X W.
Var linear(Var x, Var w, Var b);

enum class Unary {
  relu,
  exp,
  log,     // DomainError on x <= 0
  square,
  hinge,   // max(0, x); subgradient 0 at x = 0
  sqrt,    // DomainError on x < 0; subgradient 0 at x = 0
  rsqrt,   // x^(-1/2); DomainError on x <= 0
  negate,
};

enum class Binary { add, subtract, multiply };

Var elementwise(Unary op, Var a);
// Shapes must match, or one operand must be 1x1 (broadcast).
Var elementwise(Binary op, Var a, Var b);
Var scale(Var a, double factor);
Var add_scalar(Var a, double offset);

inline Var relu(Var a) { return elementwise(Unary::relu, a); }
inline Var exp(Var a) { return elementwise(Unary::exp, a); }
inline Var log(Var a) { return elementwise(Unary::log, a); }
inline Var square(Var a) { return elementwise(Unary::square, a); }
inline Var hinge(Var a) { return elementwise(Unary::hinge, a); }
inline Var sqrt(Var a) { return elementwise(Unary::sqrt, a); }
inline Var rsqrt(Var a) { return elementwise(Unary::rsqrt, a); }
inline Var add(Var a, Var b) { return elementwise(Binary::add, a, b); }
inline Var subtract(Var a, Var b) { return elementwise(Binary::subtract, a, b); }
inline Var multiply(Var a, Var b) { return elementwise(Binary::multiply, a, b); }

enum class Reduce { sum, mean, max };

// Axis::rows collapses the row dimension (result 1 x cols), Axis::cols
// collapses columns (rows x 1), Axis::all gives 1x1. max routes the gradient
// to the first maximal entry.
enum class Axis { rows, cols, all };

Var reduce(Reduce op, Var a, Axis axis);
inline Var sum(Var a, Axis axis = Axis::all) { return reduce(Reduce::sum, a, axis); }
inline Var mean(Var a, Axis axis = Axis::all) { return reduce(Reduce::mean, a, axis); }
inline Var max(Var a, Axis axis) { return reduce(Reduce::max, a, axis); }

// [A | B]; row counts must match.
Var concat_cols(Var a, Var b);
// Columns [begin, end).
Var slice_cols(Var a, std::size_t begin, std::size_t end);
// Row i of the result is row indices[i] of A. Backward scatter-adds.
Var gather_rows(Var a, std::span<const std::size_t> indices);

// X with A X = B, via partial-pivot LU. The factorization is kept for the
// adjoint solve: dB = A^-T G, dA = -dB X^T. Throws SingularMatrixError when a
// pivot magnitude is <= pivot_tolerance.
inline constexpr double kPivotTolerance = 1e-12;
Var linear_solve(Var a, Var b);

// Row-wise softmax, stabilized by subtracting the row max.
Var row_softmax(Var a);
// Row-wise log-softmax; finite for any finite input.
Var row_log_softmax(Var a);

// D[i][j] = ||x_i - x_j||^2 over the rows of X (n x d -> n x n).
Var pairwise_sq_dist(Var x);

// out[i][j] = v[i] * W[i][j] * v[j] for square W and column vector v.
Var diag_scale(Var w, Var v);

}  // namespace spseg::ops
