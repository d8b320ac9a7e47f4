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
#include <ostream>
#include <string>
#include <vector>

#include "spseg/pipeline/config.hpp"
#include "spseg/pipeline/dataset.hpp"
#include "spseg/pipeline/evaluate.hpp"

namespace spseg::pipeline {

// Sweepable keys: beta, alpha, groups.
bool is_sweepable(const std::string& param);

struct SweepRow {
  double value = 0.0;
  EvalSummary mean;  // over seeds, validation split
};

struct SweepTable {
  std::string param;
  std::vector<SweepRow> rows;  // ascending value
};

// One training run per (value, seed). Seeds are base.seed, base.seed + 1, ...
// Throws ConfigError for unknown parameters or values the config rejects,
// before any training starts.
SweepTable sweep(const RunConfig& base, const Dataset& data, const std::string& param,
                 const std::vector<std::string>& values, std::size_t seeds = 1);

// Header `<param> mPrec mIoU mCov mWCov`, then one row per value.
void write_sweep_table(std::ostream& out, const SweepTable& t);
// Long form for plotting: `param value metric score`.
void write_sweep_series(std::ostream& out, const SweepTable& t);

}  // namespace spseg::pipeline
