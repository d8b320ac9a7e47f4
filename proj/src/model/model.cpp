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

#include "spseg/model/model.hpp"

#include <cmath>
#include <sstream>
#include <tuple>

#include "spseg/common/error.hpp"
#include "spseg/common/rng.hpp"

namespace spseg::model {
namespace {

std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

std::vector<std::size_t> split_widths(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(tok, &used);
      if (used != tok.size() || v < 0) throw ConfigError("bad width '" + tok + "'");
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::logic_error&) {
      throw ConfigError("bad width '" + tok + "'");
    }
  }
  return out;
}

}  // namespace

void Architecture::validate() const {
  auto positive = [](std::size_t v, const char* what) {
    if (v == 0) throw ConfigError(std::string("architecture width '") + what + "' must be positive");
  };
  positive(input_width, "input_width");
  if (point_widths.empty() || fuse_widths.empty()) {
    throw ConfigError("architecture needs at least one point layer and one fuse layer");
  }
  for (std::size_t w : point_widths) positive(w, "point_widths");
  for (std::size_t w : fuse_widths) positive(w, "fuse_widths");
  positive(ins_hidden, "ins_hidden");
  positive(ins_width, "ins_width");
  positive(sem_width, "sem_width");
  if (num_classes < 2) {
    throw ConfigError("semantic head needs at least 2 classes, got " + std::to_string(num_classes));
  }
}

std::string Architecture::to_text() const {
  std::ostringstream out;
  out << "input_width " << input_width << '\n'
      << "point_widths " << join(point_widths) << '\n'
      << "fuse_widths " << join(fuse_widths) << '\n'
      << "ins_hidden " << ins_hidden << '\n'
      << "ins_width " << ins_width << '\n'
      << "sem_width " << sem_width << '\n'
      << "num_classes " << num_classes << '\n';
  return out.str();
}

Architecture Architecture::from_text(const std::string& text) {
  Architecture a;
  std::istringstream in(text);
  std::string key, value;
  while (in >> key >> value) {
    auto scalar = [&] {
      auto w = split_widths(value);
      if (w.size() != 1) throw ConfigError("architecture key '" + key + "' takes one width");
      return w[0];
    };
    if (key == "input_width") a.input_width = scalar();
    else if (key == "point_widths") a.point_widths = split_widths(value);
    else if (key == "fuse_widths") a.fuse_widths = split_widths(value);
    else if (key == "ins_hidden") a.ins_hidden = scalar();
    else if (key == "ins_width") a.ins_width = scalar();
    else if (key == "sem_width") a.sem_width = scalar();
    else if (key == "num_classes") a.num_classes = scalar();
    else throw ConfigError("unknown architecture key '" + key + "'");
  }
  a.validate();
  return a;
}

ModelParams::ModelParams(Architecture arch, std::uint64_t seed)
    : arch_(std::move(arch)), seed_(seed) {}

const Matrix& ModelParams::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractError("no parameter named '" + name + "'");
  return entries_[it->second].second;
}

Matrix& ModelParams::get(const std::string& name) {
  return const_cast<Matrix&>(std::as_const(*this).get(name));
}

bool ModelParams::contains(const std::string& name) const { return index_.count(name) > 0; }

void ModelParams::add(std::string name, Matrix value) {
  if (contains(name)) throw ContractError("duplicate parameter '" + name + "'");
  index_.emplace(name, entries_.size());
  entries_.emplace_back(std::move(name), std::move(value));
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, m] : entries_) n += m.size();
  return n;
}

ModelParams init_params(std::uint64_t seed, const Architecture& arch) {
  arch.validate();
  ModelParams p(arch, seed);
  Rng rng(seed);
  auto dense = [&](const std::string& prefix, std::size_t fan_in, std::size_t fan_out) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Matrix w(fan_in, fan_out);
    for (double& v : w.values()) v = rng.uniform(-limit, limit);
    p.add(prefix + ".w", std::move(w));
    p.add(prefix + ".b", Matrix(1, fan_out));
  };

  std::size_t in = arch.input_width;
  for (std::size_t i = 0; i < arch.point_widths.size(); ++i) {
    dense("point." + std::to_string(i), in, arch.point_widths[i]);
    in = arch.point_widths[i];
  }
  in = arch.point_widths.front() + arch.point_widths.back();
  for (std::size_t i = 0; i < arch.fuse_widths.size(); ++i) {
    dense("fuse." + std::to_string(i), in, arch.fuse_widths[i]);
    in = arch.fuse_widths[i];
  }
  const std::size_t h = arch.feature_width();
  dense("ins.0", h, arch.ins_hidden);
  dense("ins.1", arch.ins_hidden, arch.ins_width);
  dense("sem.0", h, arch.sem_width);
  dense("sem.logits", arch.sem_width, arch.num_classes);
  dense("joint", arch.joint_width(), arch.joint_width());
  return p;
}

BoundModel::BoundModel(Tape& tape, const ModelParams& params, bool trainable)
    : tape_(&tape), arch_(&params.arch()) {
  vars_.reserve(params.entries().size());
  for (const auto& [name, value] : params.entries()) {
    index_.emplace(name, vars_.size());
    vars_.push_back(trainable ? tape.parameter(value) : tape.constant(value));
  }
}

BoundModel::BoundModel(const ModelParams& layout, std::vector<Var> vars)
    : tape_(nullptr), arch_(&layout.arch()), vars_(std::move(vars)) {
  if (vars_.size() != layout.entries().size() || vars_.empty()) {
    throw ContractError("BoundModel needs one variable per parameter");
  }
  tape_ = &vars_.front().tape();
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    const Matrix& want = layout.entries()[i].second;
    if (!vars_[i].value().same_shape(want)) {
      throw DimensionError("parameter '" + layout.entries()[i].first + "' bound with shape " +
                           vars_[i].value().shape_string() + ", expected " + want.shape_string());
    }
    index_.emplace(layout.entries()[i].first, i);
  }
}

Var BoundModel::operator[](const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractError("model has no parameter '" + name + "'");
  return vars_[it->second];
}

namespace {

Var dense(const BoundModel& m, const std::string& prefix, Var x) {
  return ops::linear(x, m[prefix + ".w"], m[prefix + ".b"]);
}

}  // namespace

Var backbone_forward(const BoundModel& m, Var points) {
  const Architecture& a = m.arch();
  if (points.cols() != a.input_width) {
    throw DimensionError("backbone expects " + std::to_string(a.input_width) +
                         " input columns, got " + points.value().shape_string());
  }
  if (points.rows() == 0) throw DimensionError("backbone input has no points");
  Var h = points;
  Var local;
  for (std::size_t i = 0; i < a.point_widths.size(); ++i) {
    h = ops::relu(dense(m, "point." + std::to_string(i), h));
    if (i == 0) local = h;
  }
  Var pooled = ops::max(h, ops::Axis::rows);
  const std::vector<std::size_t> broadcast(points.rows(), 0);
  h = ops::concat_cols(local, ops::gather_rows(pooled, broadcast));
  for (std::size_t i = 0; i < a.fuse_widths.size(); ++i) {
    h = ops::relu(dense(m, "fuse." + std::to_string(i), h));
  }
  return h;
}

Var instance_head(const BoundModel& m, Var f) {
  return dense(m, "ins.1", ops::relu(dense(m, "ins.0", f)));
}

std::pair<Var, Var> semantic_head(const BoundModel& m, Var f) {
  Var f_sem = ops::relu(dense(m, "sem.0", f));
  return {f_sem, dense(m, "sem.logits", f_sem)};
}

Var joint_embed(const BoundModel& m, Var f_ins, Var f_sem) {
  if (f_ins.rows() != f_sem.rows()) {
    throw DimensionError("joint_embed row mismatch " + f_ins.value().shape_string() + " vs " +
                         f_sem.value().shape_string());
  }
  return dense(m, "joint", ops::concat_cols(f_ins, f_sem));
}

FeatureBundle forward(const BoundModel& m, Var points, bool with_joint) {
  FeatureBundle out;
  out.f = backbone_forward(m, points);
  out.f_ins = instance_head(m, out.f);
  std::tie(out.f_sem, out.sem_logits) = semantic_head(m, out.f);
  if (with_joint) out.f_joint = joint_embed(m, out.f_ins, out.f_sem);
  return out;
}

Inference infer(const ModelParams& params, const Matrix& points) {
  Tape tape;
  BoundModel m(tape, params, false);
  FeatureBundle b = forward(m, tape.constant(points), false);
  return {b.f_ins.value(), b.sem_logits.value()};
}

}  // namespace spseg::model
