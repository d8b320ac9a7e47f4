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

#include <functional>
#include <ostream>
#include <vector>

#include "spseg/model/model.hpp"
#include "spseg/pipeline/config.hpp"
#include "spseg/pipeline/dataset.hpp"
#include "spseg/pipeline/evaluate.hpp"

namespace spseg::pipeline {

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  double lr = 0.0;
  // Means over the epoch's samples.
  double l_ins = 0.0;
  double l_sem = 0.0;
  double l_sp = 0.0;
  double total = 0.0;
  std::size_t samples = 0;
  std::size_t sp_skipped = 0;  // samples whose propagation graph was degenerate
  bool validated = false;
  EvalSummary val;
};

struct TrainOptions {
  bool selfpred = true;  // false trains the baseline objective
  std::function<void(const EpochLog&)> on_epoch;
};

struct TrainResult {
  model::ModelParams params;
  std::vector<EpochLog> log;
};

// Learning rate for a 0-based epoch: halved every lr_halve_every epochs.
double learning_rate(const RunConfig& cfg, std::size_t epoch);

TrainResult train(const RunConfig& cfg, const Dataset& data, const TrainOptions& opts = {});

// Tab-separated, one header line then one row per epoch.
void write_train_log(std::ostream& out, const std::vector<EpochLog>& log);

}  // namespace spseg::pipeline
