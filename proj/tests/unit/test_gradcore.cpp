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

#include <cmath>
#include <vector>

#include "doctest.h"
#include "spseg/common/error.hpp"
#include "spseg/common/rng.hpp"
#include "spseg/gradcore/lu.hpp"
#include "spseg/gradcore/ops.hpp"
#include "support/finite_diff.hpp"

using namespace spseg;
using spseg::testing::check_gradients;
using spseg::testing::random_matrix;

TEST_CASE("matmul values and errors") {
  Tape tape;
  Rng rng(1);
  Matrix b = random_matrix(rng, 3, 4);
  Var out = ops::matmul(tape.constant(Matrix::identity(3)), tape.constant(b));
  CHECK(out.value() == b);

  Var a = tape.parameter(Matrix{{2.0}});
  Var c = ops::matmul(a, tape.constant(Matrix{{3.0}}));
  CHECK(c.scalar() == 6.0);
  CHECK(tape.backward(c)[a][0] == 3.0);

  CHECK_THROWS_AS(ops::matmul(tape.constant(Matrix(2, 3)), tape.constant(Matrix(2, 3))),
                  DimensionError);
}

TEST_CASE("matmul gradient matches finite differences") {
  Rng rng(2);
  auto f = [](Tape&, const std::vector<Var>& p) {
    return ops::sum(ops::square(ops::matmul(p[0], p[1])));
  };
  auto res = check_gradients(f, {random_matrix(rng, 3, 4), random_matrix(rng, 4, 2)});
  CHECK(res.max_rel_error < 1e-6);
}

TEST_CASE("elementwise values") {
  Tape tape;
  CHECK(ops::relu(tape.constant(Matrix{{-1.0, 2.0}})).value() == Matrix{{0.0, 2.0}});
  CHECK(ops::hinge(tape.constant(Matrix{{0.5 - 0.5}})).scalar() == 0.0);
  CHECK(ops::exp(tape.constant(Matrix{{-2.0}})).scalar() == doctest::Approx(0.13534).epsilon(1e-4));
  CHECK_THROWS_AS(ops::log(tape.constant(Matrix{{0.0}})), DomainError);
  CHECK_THROWS_AS(ops::log(tape.constant(Matrix{{-1.0}})), DomainError);
  CHECK_THROWS_AS(ops::add(tape.constant(Matrix(2, 2)), tape.constant(Matrix(2, 3))),
                  DimensionError);
  // scalar broadcast
  Var s = ops::multiply(tape.constant(Matrix{{2.0}}), tape.constant(Matrix{{1.0, 3.0}}));
  CHECK(s.value() == Matrix{{2.0, 6.0}});
}

TEST_CASE("hinge subgradient at zero is zero") {
  Tape tape;
  Var x = tape.parameter(Matrix{{0.0, -1.0, 2.0}});
  auto g = tape.backward(ops::sum(ops::hinge(x)));
  CHECK(g[x] == Matrix{{0.0, 0.0, 1.0}});
}

TEST_CASE("elementwise gradients match finite differences") {
  Rng rng(3);
  const Matrix pos = random_matrix(rng, 3, 3, 0.5, 2.0);
  const Matrix any = random_matrix(rng, 3, 3);
  const Matrix other = random_matrix(rng, 3, 3);
  for (ops::Unary op : {ops::Unary::exp, ops::Unary::log, ops::Unary::square, ops::Unary::sqrt,
                        ops::Unary::rsqrt, ops::Unary::negate}) {
    auto f = [op](Tape&, const std::vector<Var>& p) {
      return ops::sum(ops::multiply(ops::elementwise(op, p[0]), p[1]));
    };
    CHECK(check_gradients(f, {pos, other}).max_rel_error < 1e-4);
  }
  // relu/hinge away from the kink
  for (ops::Unary op : {ops::Unary::relu, ops::Unary::hinge}) {
    auto f = [op](Tape&, const std::vector<Var>& p) {
      return ops::sum(ops::multiply(ops::elementwise(op, p[0]), p[1]));
    };
    CHECK(check_gradients(f, {any, other}).max_rel_error < 1e-4);
  }
  for (ops::Binary op : {ops::Binary::add, ops::Binary::subtract, ops::Binary::multiply}) {
    auto f = [op](Tape&, const std::vector<Var>& p) {
      Var x = ops::elementwise(op, p[0], p[1]);
      Var y = ops::elementwise(op, p[2], x);  // 1x1 broadcast on the left
      return ops::sum(ops::square(y));
    };
    CHECK(check_gradients(f, {any, other, Matrix{{0.7}}}).max_rel_error < 1e-4);
  }
}

TEST_CASE("reductions") {
  Tape tape;
  Var a = tape.parameter(Matrix{{1.0, 5.0}, {3.0, 2.0}});
  Var m = ops::max(a, ops::Axis::rows);
  CHECK(m.value() == Matrix{{3.0, 5.0}});
  CHECK(ops::mean(tape.constant(Matrix{{2.0, 4.0}})).scalar() == 3.0);
  CHECK(ops::sum(a, ops::Axis::cols).value() == Matrix{{6.0}, {5.0}});
  CHECK_THROWS_AS(ops::sum(tape.constant(Matrix(0, 3)), ops::Axis::rows), DomainError);

  auto g = tape.backward(ops::sum(m));
  CHECK(g[a] == Matrix{{0.0, 1.0}, {1.0, 0.0}});

  Rng rng(4);
  for (ops::Reduce op : {ops::Reduce::sum, ops::Reduce::mean, ops::Reduce::max}) {
    for (ops::Axis axis : {ops::Axis::rows, ops::Axis::cols, ops::Axis::all}) {
      auto f = [op, axis](Tape& t, const std::vector<Var>& p) {
        Var r = ops::reduce(op, p[0], axis);
        Matrix w(r.rows(), r.cols());
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = 0.3 + 0.1 * static_cast<double>(i);
        return ops::sum(ops::multiply(r, t.constant(w)));
      };
      CHECK(check_gradients(f, {random_matrix(rng, 4, 3)}).max_rel_error < 1e-6);
    }
  }
}

TEST_CASE("concat_cols and slice_cols") {
  Tape tape;
  Var a = tape.constant(Matrix(5, 32, 1.0));
  Var b = tape.constant(Matrix(5, 128, 2.0));
  CHECK(ops::concat_cols(a, b).cols() == 160);
  Var with_empty = ops::concat_cols(a, tape.constant(Matrix(5, 0)));
  CHECK(with_empty.value() == a.value());
  CHECK_THROWS_AS(ops::concat_cols(a, tape.constant(Matrix(4, 1))), DimensionError);
  CHECK(ops::slice_cols(ops::concat_cols(a, b), 32, 160).value() == b.value());

  Rng rng(5);
  auto f = [](Tape&, const std::vector<Var>& p) {
    Var c = ops::concat_cols(p[0], p[1]);
    return ops::sum(ops::square(ops::matmul(c, p[2])));
  };
  auto res = check_gradients(
      f, {random_matrix(rng, 2, 2), random_matrix(rng, 2, 1), random_matrix(rng, 3, 2)});
  CHECK(res.max_rel_error < 1e-6);
}

TEST_CASE("linear adds the bias row to every output row") {
  Tape tape;
  Var y = ops::linear(tape.constant(Matrix{{1.0, 2.0}, {3.0, 4.0}}),
                      tape.constant(Matrix{{1.0, 0.0, 1.0}, {0.0, 1.0, 1.0}}),
                      tape.constant(Matrix{{0.5, -0.5, 0.0}}));
  CHECK(y.value() == Matrix{{1.5, 1.5, 3.0}, {3.5, 3.5, 7.0}});
  CHECK_THROWS_AS(ops::linear(y, tape.constant(Matrix(3, 2)), tape.constant(Matrix(2, 1))),
                  DimensionError);

  Rng rng(12);
  auto f = [](Tape&, const std::vector<Var>& p) {
    return ops::sum(ops::square(ops::linear(p[0], p[1], p[2])));
  };
  auto res = check_gradients(
      f, {random_matrix(rng, 5, 3), random_matrix(rng, 3, 4), random_matrix(rng, 1, 4)});
  CHECK(res.max_rel_error < 1e-6);
}

TEST_CASE("gather_rows scatters gradients back") {
  Rng rng(6);
  const std::vector<std::size_t> idx{2, 0, 2, 1};
  auto f = [&idx](Tape&, const std::vector<Var>& p) {
    return ops::sum(ops::square(ops::gather_rows(p[0], idx)));
  };
  CHECK(check_gradients(f, {random_matrix(rng, 3, 4)}).max_rel_error < 1e-6);
}

TEST_CASE("linear_solve closed forms") {
  Tape tape;
  Rng rng(7);
  Matrix b = random_matrix(rng, 3, 2);
  CHECK(max_abs_diff(ops::linear_solve(tape.constant(Matrix::identity(3)), tape.constant(b))
                         .value(),
                     b) < 1e-15);

  // [[1,-a],[-a,1]]^-1 = 1/(1-a^2) [[1,a],[a,1]] with a = 0.99
  Var x = ops::linear_solve(tape.constant(Matrix{{1.0, -0.99}, {-0.99, 1.0}}),
                            tape.constant(Matrix{{1.0, 0.0}, {0.0, 0.0}}));
  const double inv = 1.0 / (1.0 - 0.99 * 0.99);
  CHECK(x.value()(0, 0) == doctest::Approx(inv).epsilon(1e-12));
  CHECK(x.value()(1, 0) == doctest::Approx(0.99 * inv).epsilon(1e-12));
  CHECK(std::abs(x.value()(0, 0) - 50.25126) < 1e-5);
  CHECK(std::abs(x.value()(1, 0) - 49.74874) < 1e-5);
  CHECK(x.value()(0, 1) == 0.0);
}

TEST_CASE("linear_solve names the failing pivot") {
  Tape tape;
  try {
    ops::linear_solve(tape.constant(Matrix{{1.0, 2.0}, {2.0, 4.0}}),
                      tape.constant(Matrix{{1.0}, {1.0}}));
    FAIL("expected SingularMatrixError");
  } catch (const SingularMatrixError& e) {
    CHECK(e.pivot_index() == 1);
    CHECK(std::string(e.what()).find("pivot 1") != std::string::npos);
  }
}

TEST_CASE("linear_solve residual and gradient") {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix a = random_matrix(rng, 6, 6);
    for (std::size_t i = 0; i < 6; ++i) a(i, i) += 3.0;
    Matrix b = random_matrix(rng, 6, 3);
    Tape tape;
    Var x = ops::linear_solve(tape.constant(a), tape.constant(b));
    CHECK(max_abs_diff(matmul(a, x.value()), b) < 1e-8);
  }
  auto f = [](Tape&, const std::vector<Var>& p) {
    return ops::sum(ops::linear_solve(p[0], p[1]));
  };
  Matrix a = random_matrix(rng, 4, 4);
  for (std::size_t i = 0; i < 4; ++i) a(i, i) += 2.0;
  CHECK(check_gradients(f, {a, random_matrix(rng, 4, 2)}).max_rel_error < 1e-4);
}

TEST_CASE("LU transposed solve") {
  Rng rng(9);
  Matrix a = random_matrix(rng, 5, 5);
  Matrix b = random_matrix(rng, 5, 2);
  LuFactorization lu(a);
  CHECK(max_abs_diff(matmul(a.transposed(), lu.solve_transposed(b)), b) < 1e-10);
}

TEST_CASE("row_softmax") {
  Tape tape;
  CHECK(ops::row_softmax(tape.constant(Matrix{{0.0, 0.0}})).value() == Matrix{{0.5, 0.5}});
  Var big = ops::row_softmax(tape.constant(Matrix{{1000.0, 0.0}}));
  CHECK(std::abs(big.value()(0, 0) - 1.0) < 1e-9);
  CHECK(big.value().all_finite());

  Rng rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix m = random_matrix(rng, 4, 5, -800.0, 800.0);
    Var p = ops::row_softmax(tape.constant(m));
    for (std::size_t r = 0; r < 4; ++r) {
      double s = 0.0;
      for (double v : p.value().row_span(r)) {
        CHECK(v >= 0.0);
        s += v;
      }
      CHECK(std::abs(s - 1.0) < 1e-9);
    }
  }

  auto f = [](Tape& t, const std::vector<Var>& p) {
    return ops::sum(ops::multiply(ops::row_softmax(p[0]),
                                  t.constant(Matrix{{1.0, 2.0, 3.0}, {-1.0, 0.5, 2.0}})));
  };
  CHECK(check_gradients(f, {random_matrix(rng, 2, 3)}).max_rel_error < 1e-5);
  auto g = [](Tape& t, const std::vector<Var>& p) {
    return ops::sum(ops::multiply(ops::row_log_softmax(p[0]),
                                  t.constant(Matrix{{1.0, 0.0, 0.0}, {0.0, 0.3, 0.7}})));
  };
  CHECK(check_gradients(g, {random_matrix(rng, 2, 3)}).max_rel_error < 1e-5);
}

TEST_CASE("pairwise distances and diagonal scaling") {
  Tape tape;
  Var d = ops::pairwise_sq_dist(tape.constant(Matrix{{0.0, 0.0}, {2.0, 0.0}}));
  CHECK(d.value() == Matrix{{0.0, 4.0}, {4.0, 0.0}});

  Rng rng(11);
  auto f = [](Tape&, const std::vector<Var>& p) {
    return ops::sum(ops::exp(ops::scale(ops::pairwise_sq_dist(p[0]), -0.5)));
  };
  CHECK(check_gradients(f, {random_matrix(rng, 5, 3)}).max_rel_error < 1e-4);
  auto g = [](Tape&, const std::vector<Var>& p) {
    return ops::sum(ops::square(ops::diag_scale(p[0], p[1])));
  };
  CHECK(check_gradients(g, {random_matrix(rng, 4, 4), random_matrix(rng, 4, 1)}).max_rel_error <
        1e-4);
}

TEST_CASE("backward contract") {
  Tape tape;
  Var x = tape.parameter(Matrix{{3.0}});
  Var unused = tape.parameter(Matrix{{1.0, 2.0}});
  Var loss = ops::sum(ops::square(x));
  auto g1 = tape.backward(loss);
  CHECK(g1[x][0] == 6.0);
  CHECK(g1[unused] == Matrix(1, 2));
  auto g2 = tape.backward(loss);
  CHECK(bitwise_equal(g1[x], g2[x]));
  CHECK_THROWS_AS(tape.backward(tape.constant(Matrix(1, 2))), ContractError);
  CHECK_THROWS_AS(g1[loss], ContractError);
}

TEST_CASE("evaluation is deterministic") {
  Rng rng(12);
  const Matrix a = random_matrix(rng, 16, 9);
  const Matrix w = random_matrix(rng, 9, 12);
  auto run = [&] {
    Tape tape;
    Var wv = tape.parameter(w);
    Var h = ops::row_softmax(ops::matmul(tape.constant(a), wv));
    Var loss = ops::sum(ops::pairwise_sq_dist(h));
    auto g = tape.backward(loss);
    return std::make_pair(h.value(), g[wv]);
  };
  auto r1 = run();
  auto r2 = run();
  CHECK(bitwise_equal(r1.first, r2.first));
  CHECK(bitwise_equal(r1.second, r2.second));
}

TEST_CASE("value references survive later recording") {
  Tape tape;
  Var a = tape.constant(Matrix{{1.0, 2.0}});
  const Matrix& held = a.value();
  for (int i = 0; i < 1000; ++i) tape.constant(Matrix(3, 3));
  CHECK(&held == &a.value());
  CHECK(held == Matrix{{1.0, 2.0}});
}
