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

#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>

#include "spseg/cluster/cluster.hpp"
#include "spseg/data/scene.hpp"
#include "spseg/losses/losses.hpp"
#include "spseg/model/model.hpp"
#include "spseg/selfpred/selfpred.hpp"

namespace spseg::pipeline {

struct RunConfig {
  // self-prediction
  double sigma = 1.0;
  double alpha = 0.99;
  double beta = 0.8;
  std::size_t groups = 8;
  bool bidirectional = true;
  bool stratified = true;
  std::string distance = "squared";  // squared | euclidean
  bool zero_diagonal = true;

  // instance loss
  double delta_v = 0.5;
  double delta_d = 1.5;
  double reg_weight = 0.001;

  // clustering and merging
  double bandwidth = 0.8;
  double merge_cell = 0.5;
  double merge_overlap = 0.3;
  double block_size = 1.0;
  double infer_stride = 0.5;  // 0 gives a plain partition

  // optimization
  double lr = 0.01;
  std::size_t lr_halve_every = 20;
  std::size_t epochs = 100;
  std::size_t batch = 8;
  double momentum = 0.0;
  std::size_t points_per_block = 512;
  std::size_t val_every = 5;  // 0 disables periodic validation
  std::uint64_t seed = 0;
  std::string mode = "scene";  // scene | shape

  // network widths
  std::vector<std::size_t> point_widths{64, 128, 256};
  std::vector<std::size_t> fuse_widths{256, 256};
  std::size_t ins_hidden = 128;
  std::size_t ins_width = 32;
  std::size_t sem_width = 128;

  // Throws ConfigError naming the offending field.
  void validate() const;

  // Applies one `key = value` assignment; throws ConfigError on unknown keys
  // or malformed values.
  void set(const std::string& key, const std::string& value);

  std::string to_text() const;

  data::Mode data_mode() const;
  model::Architecture architecture(std::size_t input_width, std::size_t num_classes) const;
  losses::InstanceLossParams instance_params() const;
  selfpred::SelfPredConfig selfpred() const;
  cluster::MeanShiftOptions mean_shift() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// `key = value` lines; `#` starts a comment. Errors carry the line number.
RunConfig parse_config(std::istream& in, const std::string& source = "<stream>");
RunConfig load_config(const std::filesystem::path& path);

}  // namespace spseg::pipeline
