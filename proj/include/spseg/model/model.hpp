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
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "spseg/gradcore/ops.hpp"

namespace spseg::model {

// Layer widths of the PointNet-style backbone and the embedding heads.
//
// Backbone: per-point MLP over point_widths, column max over all points, the
// pooled vector broadcast next to the first per-point layer's features, then
// a second per-point MLP over fuse_widths whose last width is H.
struct Architecture {
  std::size_t input_width = 9;
  std::vector<std::size_t> point_widths{64, 128, 256};
  std::vector<std::size_t> fuse_widths{256, 256};
  std::size_t ins_hidden = 128;
  std::size_t ins_width = 32;
  std::size_t sem_width = 128;
  std::size_t num_classes = 13;

  std::size_t feature_width() const { return fuse_widths.back(); }
  std::size_t joint_width() const { return ins_width + sem_width; }

  // Throws ConfigError on zero widths or fewer than two classes.
  void validate() const;

  // Flat `key value` lines, one per field.
  std::string to_text() const;
  static Architecture from_text(const std::string& text);

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

class ModelParams {
 public:
  ModelParams() = default;
  ModelParams(Architecture arch, std::uint64_t seed);

  const Architecture& arch() const noexcept { return arch_; }
  std::uint64_t seed() const noexcept { return seed_; }

  // Parameters in creation order; names are unique.
  const std::vector<std::pair<std::string, Matrix>>& entries() const noexcept { return entries_; }
  std::vector<std::pair<std::string, Matrix>>& entries() noexcept { return entries_; }

  const Matrix& get(const std::string& name) const;
  Matrix& get(const std::string& name);
  bool contains(const std::string& name) const;

  void add(std::string name, Matrix value);

  std::size_t parameter_count() const;

 private:
  Architecture arch_;
  std::uint64_t seed_ = 0;
  std::vector<std::pair<std::string, Matrix>> entries_;
  std::map<std::string, std::size_t> index_;
};

// Glorot-uniform weights from one seeded stream in creation order, zero biases.
ModelParams init_params(std::uint64_t seed, const Architecture& arch);

// Parameters placed on a tape, either as trainable leaves or as constants.
class BoundModel {
 public:
  BoundModel(Tape& tape, const ModelParams& params, bool trainable);
  // Adopts leaves already on a tape, one per entry of `layout` in order.
  BoundModel(const ModelParams& layout, std::vector<Var> vars);

  const Architecture& arch() const noexcept { return *arch_; }
  Tape& tape() const noexcept { return *tape_; }
  Var operator[](const std::string& name) const;
  // Same order as ModelParams::entries().
  const std::vector<Var>& vars() const noexcept { return vars_; }

 private:
  Tape* tape_;
  const Architecture* arch_;
  std::vector<Var> vars_;
  std::map<std::string, std::size_t> index_;
};

struct FeatureBundle {
  Var f;           // N x H
  Var f_ins;       // N x ins_width
  Var f_sem;       // N x sem_width
  Var sem_logits;  // N x num_classes
  Var f_joint;     // N x joint_width; invalid when not requested
};

Var backbone_forward(const BoundModel& m, Var points);
Var instance_head(const BoundModel& m, Var f);
std::pair<Var, Var> semantic_head(const BoundModel& m, Var f);
Var joint_embed(const BoundModel& m, Var f_ins, Var f_sem);

// Backbone plus heads. The joint embedding only feeds the training-time
// propagation head, so inference leaves it out.
FeatureBundle forward(const BoundModel& m, Var points, bool with_joint);

// Forward pass without gradients: instance embeddings and semantic logits.
struct Inference {
  Matrix f_ins;
  Matrix sem_logits;
};
Inference infer(const ModelParams& params, const Matrix& points);

}  // namespace spseg::model
