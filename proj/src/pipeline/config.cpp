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

#include "spseg/pipeline/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "spseg/common/error.hpp"

namespace spseg::pipeline {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(x)) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
  }
  return x;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t x = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError("config key '" + key + "': expected a non-negative integer, got '" + v + "'");
  }
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config key '" + key + "': expected true or false, got '" + v + "'");
}

std::vector<std::size_t> to_widths(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_uint(key, trim(item)));
  if (out.empty()) throw ConfigError("config key '" + key + "': empty width list");
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const std::vector<std::size_t>& w) {
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) s += (i ? "," : "") + std::to_string(w[i]);
  return s;
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  using Setter = std::function<void(RunConfig&, const std::string&)>;
  auto num = [](double RunConfig::*f) -> Setter {
    return [f](RunConfig& c, const std::string& v) { c.*f = to_double("", v); };
  };
  auto cnt = [](std::size_t RunConfig::*f) -> Setter {
    return [f](RunConfig& c, const std::string& v) { c.*f = to_uint("", v); };
  };
  auto flag = [](bool RunConfig::*f) -> Setter {
    return [f](RunConfig& c, const std::string& v) { c.*f = to_bool("", v); };
  };
  auto widths = [](std::vector<std::size_t> RunConfig::*f) -> Setter {
    return [f](RunConfig& c, const std::string& v) { c.*f = to_widths("", v); };
  };
  static const std::map<std::string, Setter> setters = {
      {"sigma", num(&RunConfig::sigma)},
      {"alpha", num(&RunConfig::alpha)},
      {"beta", num(&RunConfig::beta)},
      {"groups", cnt(&RunConfig::groups)},
      {"bidirectional", flag(&RunConfig::bidirectional)},
      {"stratified", flag(&RunConfig::stratified)},
      {"distance", [](RunConfig& c, const std::string& v) { c.distance = v; }},
      {"zero_diagonal", flag(&RunConfig::zero_diagonal)},
      {"delta_v", num(&RunConfig::delta_v)},
      {"delta_d", num(&RunConfig::delta_d)},
      {"reg_weight", num(&RunConfig::reg_weight)},
      {"bandwidth", num(&RunConfig::bandwidth)},
      {"merge_cell", num(&RunConfig::merge_cell)},
      {"merge_overlap", num(&RunConfig::merge_overlap)},
      {"block_size", num(&RunConfig::block_size)},
      {"infer_stride", num(&RunConfig::infer_stride)},
      {"lr", num(&RunConfig::lr)},
      {"lr_halve_every", cnt(&RunConfig::lr_halve_every)},
      {"epochs", cnt(&RunConfig::epochs)},
      {"batch", cnt(&RunConfig::batch)},
      {"momentum", num(&RunConfig::momentum)},
      {"points_per_block", cnt(&RunConfig::points_per_block)},
      {"val_every", cnt(&RunConfig::val_every)},
      {"seed", [](RunConfig& c, const std::string& v) { c.seed = to_uint("seed", v); }},
      {"mode", [](RunConfig& c, const std::string& v) { c.mode = v; }},
      {"point_widths", widths(&RunConfig::point_widths)},
      {"fuse_widths", widths(&RunConfig::fuse_widths)},
      {"ins_hidden", cnt(&RunConfig::ins_hidden)},
      {"ins_width", cnt(&RunConfig::ins_width)},
      {"sem_width", cnt(&RunConfig::sem_width)},
  };
  auto it = setters.find(key);
  if (it == setters.end()) throw ConfigError("unknown config key '" + key + "'");
  try {
    it->second(*this, value);
  } catch (const ConfigError&) {
    throw ConfigError("config key '" + key + "': bad value '" + value + "'");
  }
}

void RunConfig::validate() const {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("invalid config: ") + what);
  };
  need(sigma > 0.0, "sigma must be positive");
  need(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
  need(beta >= 0.0, "beta must be non-negative");
  need(groups >= 2 && groups % 2 == 0, "groups must be even and at least 2");
  need(distance == "squared" || distance == "euclidean", "distance must be squared or euclidean");
  need(delta_v > 0.0 && delta_d > 0.0 && 2.0 * delta_d > delta_v,
       "margins must be positive with 2*delta_d > delta_v");
  need(reg_weight >= 0.0, "reg_weight must be non-negative");
  need(bandwidth > 0.0, "bandwidth must be positive");
  need(merge_cell > 0.0, "merge_cell must be positive");
  need(merge_overlap >= 0.0 && merge_overlap <= 1.0, "merge_overlap must lie in [0, 1]");
  need(block_size > 0.0, "block_size must be positive");
  need(infer_stride >= 0.0 && infer_stride <= block_size, "infer_stride must lie in [0, block_size]");
  need(lr > 0.0, "lr must be positive");
  need(lr_halve_every > 0, "lr_halve_every must be positive");
  need(batch > 0, "batch must be positive");
  need(momentum >= 0.0 && momentum < 1.0, "momentum must lie in [0, 1)");
  need(points_per_block >= groups, "points_per_block must be at least groups");
  need(mode == "scene" || mode == "shape", "mode must be scene or shape");
  architecture(data::input_width(data_mode()), 2).validate();
}

std::string RunConfig::to_text() const {
  std::ostringstream o;
  o << "sigma = " << fmt(sigma) << "\n"
    << "alpha = " << fmt(alpha) << "\n"
    << "beta = " << fmt(beta) << "\n"
    << "groups = " << groups << "\n"
    << "bidirectional = " << (bidirectional ? "true" : "false") << "\n"
    << "stratified = " << (stratified ? "true" : "false") << "\n"
    << "distance = " << distance << "\n"
    << "zero_diagonal = " << (zero_diagonal ? "true" : "false") << "\n"
    << "delta_v = " << fmt(delta_v) << "\n"
    << "delta_d = " << fmt(delta_d) << "\n"
    << "reg_weight = " << fmt(reg_weight) << "\n"
    << "bandwidth = " << fmt(bandwidth) << "\n"
    << "merge_cell = " << fmt(merge_cell) << "\n"
    << "merge_overlap = " << fmt(merge_overlap) << "\n"
    << "block_size = " << fmt(block_size) << "\n"
    << "infer_stride = " << fmt(infer_stride) << "\n"
    << "lr = " << fmt(lr) << "\n"
    << "lr_halve_every = " << lr_halve_every << "\n"
    << "epochs = " << epochs << "\n"
    << "batch = " << batch << "\n"
    << "momentum = " << fmt(momentum) << "\n"
    << "points_per_block = " << points_per_block << "\n"
    << "val_every = " << val_every << "\n"
    << "seed = " << seed << "\n"
    << "mode = " << mode << "\n"
    << "point_widths = " << join(point_widths) << "\n"
    << "fuse_widths = " << join(fuse_widths) << "\n"
    << "ins_hidden = " << ins_hidden << "\n"
    << "ins_width = " << ins_width << "\n"
    << "sem_width = " << sem_width << "\n";
  return o.str();
}

data::Mode RunConfig::data_mode() const {
  return mode == "shape" ? data::Mode::shape : data::Mode::scene;
}

model::Architecture RunConfig::architecture(std::size_t input_width,
                                            std::size_t num_classes) const {
  model::Architecture a;
  a.input_width = input_width;
  a.point_widths = point_widths;
  a.fuse_widths = fuse_widths;
  a.ins_hidden = ins_hidden;
  a.ins_width = ins_width;
  a.sem_width = sem_width;
  a.num_classes = num_classes;
  return a;
}

losses::InstanceLossParams RunConfig::instance_params() const {
  return {delta_v, delta_d, reg_weight};
}

selfpred::SelfPredConfig RunConfig::selfpred() const {
  selfpred::SelfPredConfig c;
  c.alpha = alpha;
  c.affinity.sigma = sigma;
  c.affinity.distance =
      distance == "euclidean" ? selfpred::Distance::euclidean : selfpred::Distance::squared;
  c.affinity.zero_diagonal = zero_diagonal;
  c.groups = groups;
  c.divide = stratified ? selfpred::DivideMode::stratified : selfpred::DivideMode::random;
  c.bidirectional = bidirectional;
  return c;
}

cluster::MeanShiftOptions RunConfig::mean_shift() const {
  cluster::MeanShiftOptions o;
  o.bandwidth = bandwidth;
  return o;
}

RunConfig parse_config(std::istream& in, const std::string& source) {
  RunConfig cfg;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(number) + ": ";
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      cfg.set(key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in, path.string());
}

}  // namespace spseg::pipeline
