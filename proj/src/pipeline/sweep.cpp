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

#include "spseg/pipeline/sweep.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

#include "spseg/common/error.hpp"
#include "spseg/pipeline/train.hpp"

namespace spseg::pipeline {

bool is_sweepable(const std::string& param) {
  return param == "beta" || param == "alpha" || param == "groups";
}

SweepTable sweep(const RunConfig& base, const Dataset& data, const std::string& param,
                 const std::vector<std::string>& values, std::size_t seeds) {
  if (!is_sweepable(param)) {
    throw ConfigError("'" + param + "' is not sweepable (use beta, alpha or groups)");
  }
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  if (seeds == 0) throw ConfigError("sweep needs at least one seed");

  std::vector<std::pair<double, RunConfig>> runs;
  for (const auto& v : values) {
    RunConfig c = base;
    c.set(param, v);
    c.validate();
    double x = 0.0;
    std::from_chars(v.data(), v.data() + v.size(), x);
    runs.emplace_back(x, c);
  }
  std::stable_sort(runs.begin(), runs.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  SweepTable t;
  t.param = param;
  for (const auto& [x, c] : runs) {
    SweepRow row;
    row.value = x;
    for (std::size_t k = 0; k < seeds; ++k) {
      RunConfig rc = c;
      rc.seed = base.seed + k;
      rc.val_every = 0;
      const TrainResult tr = train(rc, data);
      const EvalSummary s = evaluate(tr.params, rc, data.val).summary;
      row.mean.miou += s.miou;
      row.mean.macc += s.macc;
      row.mean.oacc += s.oacc;
      row.mean.mcov += s.mcov;
      row.mean.mwcov += s.mwcov;
      row.mean.mprec += s.mprec;
      row.mean.mrec += s.mrec;
    }
    const double inv = 1.0 / static_cast<double>(seeds);
    for (double* f : {&row.mean.miou, &row.mean.macc, &row.mean.oacc, &row.mean.mcov,
                      &row.mean.mwcov, &row.mean.mprec, &row.mean.mrec}) {
      *f *= inv;
    }
    t.rows.push_back(row);
  }
  return t;
}

namespace {
std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}
}  // namespace

void write_sweep_table(std::ostream& out, const SweepTable& t) {
  out << t.param << "\tmPrec\tmIoU\tmCov\tmWCov\n";
  for (const SweepRow& r : t.rows) {
    out << num(r.value) << '\t' << num(r.mean.mprec) << '\t' << num(r.mean.miou) << '\t'
        << num(r.mean.mcov) << '\t' << num(r.mean.mwcov) << '\n';
  }
}

void write_sweep_series(std::ostream& out, const SweepTable& t) {
  out << "param\tvalue\tmetric\tscore\n";
  for (const char* metric : {"mPrec", "mIoU"}) {
    for (const SweepRow& r : t.rows) {
      const double s = std::string(metric) == "mPrec" ? r.mean.mprec : r.mean.miou;
      out << t.param << '\t' << num(r.value) << '\t' << metric << '\t' << num(s) << '\n';
    }
  }
}

}  // namespace spseg::pipeline
