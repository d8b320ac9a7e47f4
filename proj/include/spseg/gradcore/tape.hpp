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
#include <deque>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "spseg/gradcore/matrix.hpp"

namespace spseg {

class Tape;

// Handle to a node recorded on a Tape. Cheap to copy; valid while the tape
// is alive and has not been cleared.
class Var {
 public:
  Var() = default;

  bool valid() const noexcept { return tape_ != nullptr; }
  Tape& tape() const { return *tape_; }
  std::size_t id() const noexcept { return id_; }

  const Matrix& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  // Value of a 1x1 node.
  double scalar() const;

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// What a backward rule sees: its own value and incoming gradient, its parents'
// values, and gradient slots for the parents that need one (nullptr otherwise).
// Rules add into the slots; they never overwrite.
struct BackwardContext {
  const Matrix& output;
  const Matrix& output_grad;
  std::span<const Matrix* const> inputs;
  std::span<Matrix* const> input_grads;
};

using BackwardRule = std::function<void(const BackwardContext&)>;

// Gradients of a scalar loss with respect to every parameter on the tape.
// Parameters the loss does not depend on get zero matrices.
class Gradients {
 public:
  const Matrix& operator[](Var parameter) const;
  std::size_t size() const noexcept { return entries_.size(); }
  const std::vector<std::pair<std::size_t, Matrix>>& entries() const noexcept {
    return entries_;
  }

 private:
  friend class Tape;
  std::vector<std::pair<std::size_t, Matrix>> entries_;  // sorted by node id
};

// Records a computation graph in evaluation order. Because nodes can only
// reference earlier nodes the recording order is a topological order, and
// backward walks it in reverse, so gradient accumulation order is fixed.
//
// A tape belongs to one thread at a time.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  Var parameter(Matrix value);

  // Appends a node computed from `inputs`. Used by the op library.
  Var record(Matrix value, std::vector<Var> inputs, BackwardRule rule);

  const Matrix& value(Var v) const { return nodes_[v.id()].value; }
  bool requires_grad(Var v) const { return nodes_[v.id()].requires_grad; }
  std::size_t size() const noexcept { return nodes_.size(); }

  // Reverse sweep from a 1x1 node. Each call starts from cleared gradients.
  Gradients backward(Var loss);

  void clear() { nodes_.clear(); }

 private:
  struct Node {
    Matrix value;
    std::vector<std::size_t> inputs;
    BackwardRule rule;
    bool requires_grad = false;
    bool is_parameter = false;
  };

  void check_owned(Var v) const;

  // deque keeps value references stable while later nodes are appended.
  std::deque<Node> nodes_;
};

}  // namespace spseg
