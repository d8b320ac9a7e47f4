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

#include "spseg/losses/losses.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "spseg/common/error.hpp"

namespace spseg::losses {

void InstanceLossParams::validate() const {
  if (!(delta_v > 0.0) || !(delta_d > 0.0)) {
    throw ConfigError("instance loss margins must be positive");
  }
  if (!(2.0 * delta_d > delta_v)) throw ConfigError("instance loss needs 2*delta_d > delta_v");
  if (reg_weight < 0.0) throw ConfigError("instance loss reg_weight must be non-negative");
}

InstanceLoss instance_loss(Var f_ins, std::span<const std::size_t> instance_ids,
                           const InstanceLossParams& params) {
  params.validate();
  const std::size_t n = f_ins.rows();
  if (n == 0) throw ContractError("instance_loss on an empty sample");
  if (instance_ids.size() != n) {
    throw ContractError("instance_loss: " + std::to_string(instance_ids.size()) + " ids for " +
                        std::to_string(n) + " embeddings");
  }
  std::map<std::size_t, std::size_t> dense;
  for (std::size_t id : instance_ids) dense.emplace(id, 0);
  std::size_t k = 0;
  for (auto& [id, slot] : dense) slot = k++;

  std::vector<std::size_t> which(n);
  std::vector<double> size(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    which[i] = dense[instance_ids[i]];
    size[which[i]] += 1.0;
  }

  Tape& tape = f_ins.tape();
  const double kd = static_cast<double>(k);

  // Means as a K x N averaging matrix times the embeddings.
  Matrix avg(k, n);
  Matrix point_weight(1, n);
  for (std::size_t i = 0; i < n; ++i) {
    avg(which[i], i) = 1.0 / size[which[i]];
    point_weight(0, i) = 1.0 / (kd * size[which[i]]);
  }
  Var mu = ops::matmul(tape.constant(std::move(avg)), f_ins);

  InstanceLoss out;
  Var diff = ops::subtract(f_ins, ops::gather_rows(mu, which));
  Var dist = ops::sqrt(ops::sum(ops::square(diff), ops::Axis::cols));
  Var pull = ops::square(ops::hinge(ops::add_scalar(dist, -params.delta_v)));
  out.l_var = ops::matmul(tape.constant(std::move(point_weight)), pull);

  if (k == 1) {
    out.l_dist = tape.constant(Matrix(1, 1));
  } else {
    Var mean_dist = ops::sqrt(ops::pairwise_sq_dist(mu));
    Var push = ops::square(ops::hinge(ops::add_scalar(ops::scale(mean_dist, -1.0),
                                                      2.0 * params.delta_d)));
    Matrix off_diagonal(k, k, 1.0);
    for (std::size_t i = 0; i < k; ++i) off_diagonal(i, i) = 0.0;
    out.l_dist = ops::scale(ops::sum(ops::multiply(push, tape.constant(std::move(off_diagonal)))),
                            1.0 / (kd * (kd - 1.0)));
  }

  out.l_reg = ops::mean(ops::sqrt(ops::sum(ops::square(mu), ops::Axis::cols)));
  out.l_ins = ops::add(ops::add(out.l_var, out.l_dist), ops::scale(out.l_reg, params.reg_weight));
  return out;
}

Var semantic_loss(Var logits, const Matrix& y) {
  const Matrix& z = logits.value();
  if (!z.same_shape(y)) {
    throw ContractError("semantic_loss: logits " + z.shape_string() + " vs targets " +
                        y.shape_string());
  }
  if (z.rows() == 0) throw ContractError("semantic_loss on an empty sample");
  for (std::size_t r = 0; r < y.rows(); ++r) {
    std::size_t ones = 0;
    for (double v : y.row_span(r)) {
      if (v == 1.0) {
        ++ones;
      } else if (v != 0.0) {
        ones = 2;
        break;
      }
    }
    if (ones != 1) throw ContractError("semantic_loss: target row " + std::to_string(r) + " is not one-hot");
  }
  Var picked = ops::multiply(ops::row_log_softmax(logits), logits.tape().constant(y));
  return ops::scale(ops::sum(picked), -1.0 / static_cast<double>(z.rows()));
}

Var total_loss(Var l_ins, Var l_sem, Var l_sp, double beta) {
  if (!(beta >= 0.0)) throw ConfigError("beta must be non-negative, got " + std::to_string(beta));
  for (Var v : {l_ins, l_sem, l_sp}) {
    if (v.rows() != 1 || v.cols() != 1) throw ContractError("total_loss components must be 1x1");
  }
  return ops::add(ops::add(l_ins, l_sem), ops::scale(l_sp, beta));
}

}  // namespace spseg::losses
