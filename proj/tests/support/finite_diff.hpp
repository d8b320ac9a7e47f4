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

// Central finite-difference oracle for gradient checks. It re-evaluates the
// loss on fresh tapes and never looks at backward rules, so it stays
// independent of the code it checks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "spseg/common/rng.hpp"
#include "spseg/gradcore/tape.hpp"

namespace spseg::testing {

using LossFn = std::function<Var(Tape&, const std::vector<Var>&)>;

struct GradCheck {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t checked = 0;
};

// |a - n| / max(|a|, |n|, floor). The floor keeps entries whose true
// gradient is zero from dividing roundoff by roundoff.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), floor});
}

inline double evaluate(const LossFn& f, const std::vector<Matrix>& params) {
  Tape tape;
  std::vector<Var> vars;
  for (const Matrix& p : params) vars.push_back(tape.parameter(p));
  return f(tape, vars).scalar();
}

// Checks every entry when max_entries_per_param == 0, otherwise a seeded
// random subset of that many entries per parameter.
inline GradCheck check_gradients(const LossFn& f, std::vector<Matrix> params,
                                 double h = 1e-5, std::size_t max_entries_per_param = 0,
                                 std::uint64_t seed = 7) {
  Tape tape;
  std::vector<Var> vars;
  for (const Matrix& p : params) vars.push_back(tape.parameter(p));
  const Gradients grads = tape.backward(f(tape, vars));

  GradCheck result;
  Rng rng(seed);
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    const Matrix& analytic = grads[vars[pi]];
    std::vector<std::size_t> entries;
    if (max_entries_per_param == 0 || params[pi].size() <= max_entries_per_param) {
      for (std::size_t i = 0; i < params[pi].size(); ++i) entries.push_back(i);
    } else {
      for (std::size_t i = 0; i < max_entries_per_param; ++i) {
        entries.push_back(static_cast<std::size_t>(rng.index(params[pi].size())));
      }
    }
    for (std::size_t e : entries) {
      const double saved = params[pi][e];
      auto at = [&](double offset) {
        params[pi][e] = saved + offset;
        const double v = evaluate(f, params);
        params[pi][e] = saved;
        return v;
      };
      const double numeric = (at(h) - at(-h)) / (2.0 * h);
      result.max_rel_error = std::max(result.max_rel_error, relative_error(analytic[e], numeric));
      result.max_abs_error = std::max(result.max_abs_error, std::abs(analytic[e] - numeric));
      ++result.checked;
    }
  }
  return result;
}

inline Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double lo = -1.0,
                            double hi = 1.0) {
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.uniform(lo, hi);
  return m;
}

}  // namespace spseg::testing
