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

#include "spseg/gradcore/tape.hpp"

#include <algorithm>

#include "spseg/common/error.hpp"

namespace spseg {

const Matrix& Var::value() const {
  if (tape_ == nullptr) throw ContractError("use of an unbound Var");
  return tape_->value(*this);
}

double Var::scalar() const {
  const Matrix& m = value();
  if (m.rows() != 1 || m.cols() != 1) {
    throw ContractError("scalar() on a " + m.shape_string() + " node");
  }
  return m[0];
}

const Matrix& Gradients::operator[](Var parameter) const {
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), parameter.id(),
      [](const std::pair<std::size_t, Matrix>& e, std::size_t id) { return e.first < id; });
  if (it == entries_.end() || it->first != parameter.id()) {
    throw ContractError("node " + std::to_string(parameter.id()) + " is not a parameter");
  }
  return it->second;
}

void Tape::check_owned(Var v) const {
  if (!v.valid() || &v.tape() != this || v.id() >= nodes_.size()) {
    throw ContractError("Var does not belong to this tape");
  }
}

Var Tape::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), {}, {}, false, false});
  return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(Matrix value) {
  nodes_.push_back(Node{std::move(value), {}, {}, true, true});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Matrix value, std::vector<Var> inputs, BackwardRule rule) {
  Node node;
  node.value = std::move(value);
  node.inputs.reserve(inputs.size());
  for (const Var& in : inputs) {
    check_owned(in);
    node.inputs.push_back(in.id());
    node.requires_grad = node.requires_grad || nodes_[in.id()].requires_grad;
  }
  if (node.requires_grad) node.rule = std::move(rule);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Gradients Tape::backward(Var loss) {
  check_owned(loss);
  const Matrix& lv = nodes_[loss.id()].value;
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw ContractError("backward needs a 1x1 loss, got " + lv.shape_string());
  }

  std::vector<Matrix> grads(loss.id() + 1);
  grads[loss.id()] = Matrix(1, 1, 1.0);

  std::vector<const Matrix*> in_values;
  std::vector<Matrix*> in_grads;
  for (std::size_t id = loss.id() + 1; id-- > 0;) {
    Node& node = nodes_[id];
    if (!node.requires_grad || !node.rule || grads[id].empty()) continue;
    in_values.clear();
    in_grads.clear();
    for (std::size_t in : node.inputs) {
      in_values.push_back(&nodes_[in].value);
      if (nodes_[in].requires_grad) {
        if (grads[in].empty()) {
          grads[in] = Matrix(nodes_[in].value.rows(), nodes_[in].value.cols());
        }
        in_grads.push_back(&grads[in]);
      } else {
        in_grads.push_back(nullptr);
      }
    }
    node.rule(BackwardContext{node.value, grads[id], in_values, in_grads});
    // Intermediate gradients are no longer needed once propagated.
    if (!node.is_parameter) grads[id] = Matrix();
  }

  Gradients out;
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    if (!nodes_[id].is_parameter) continue;
    if (id < grads.size() && !grads[id].empty()) {
      out.entries_.emplace_back(id, std::move(grads[id]));
    } else {
      out.entries_.emplace_back(
          id, Matrix(nodes_[id].value.rows(), nodes_[id].value.cols()));
    }
  }
  return out;
}

}  // namespace spseg
