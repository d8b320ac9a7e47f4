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

#include "spseg/gradcore/ops.hpp"

namespace spseg::losses {

struct InstanceLossParams {
  double delta_v = 0.5;
  double delta_d = 1.5;
  double reg_weight = 0.001;

  // Throws ConfigError unless both margins are positive and 2*delta_d > delta_v.
  void validate() const;
};

struct InstanceLoss {
  Var l_var;
  Var l_dist;
  Var l_reg;
  Var l_ins;
};

// Discriminative loss over instance embeddings (N x D) with one instance id
// per row. Ids may be sparse; only their equality matters. With a single
// instance the push term is the constant 0.
InstanceLoss instance_loss(Var f_ins, std::span<const std::size_t> instance_ids,
                           const InstanceLossParams& params = {});

// Mean cross-entropy of row-softmax(logits) against one-hot rows of y.
Var semantic_loss(Var logits, const Matrix& y);

// l_ins + l_sem + beta * l_sp.
Var total_loss(Var l_ins, Var l_sem, Var l_sp, double beta);

struct LossReport {
  double l_var = 0.0;
  double l_dist = 0.0;
  double l_reg = 0.0;
  double l_ins = 0.0;
  double l_sem = 0.0;
  double l_sp = 0.0;
  double total = 0.0;
  double beta = 0.8;
};

}  // namespace spseg::losses
