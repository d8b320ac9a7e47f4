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
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace spseg::metrics {

struct SemanticReport {
  std::vector<double> iou;       // per class; 0 for classes absent everywhere
  std::vector<double> accuracy;  // per class recall; 0 for classes absent from ground truth
  std::vector<bool> in_gt;
  std::vector<bool> in_either;
  double miou = 0.0;  // over classes seen in prediction or ground truth
  double macc = 0.0;  // over classes seen in ground truth
  double oacc = 0.0;
};

SemanticReport semantic_metrics(std::span<const std::size_t> pred, std::span<const std::size_t> gt,
                                std::size_t classes);

// Point labels of one scene: instance ids (any values) and semantic ids.
struct Labeling {
  std::span<const std::size_t> ins;
  std::span<const std::size_t> sem;
};

struct CoverageResult {
  std::vector<double> cov;   // per class, over ground-truth instances of that class
  std::vector<double> wcov;
  std::vector<bool> in_gt;
  double mcov = 0.0;
  double mwcov = 0.0;
};

// Instance classes are the majority semantic label of their points.
CoverageResult coverage(Labeling pred, Labeling gt, std::size_t classes);

struct PrecisionRecall {
  std::vector<double> precision;
  std::vector<double> recall;
  std::vector<bool> in_gt;
  double mprec = 0.0;
  double mrec = 0.0;
};

// One-to-one greedy matching by descending IoU within each class; a match
// counts when IoU >= thresh. A class with no predictions has precision 0.
PrecisionRecall precision_recall(Labeling pred, Labeling gt, std::size_t classes,
                                 double thresh = 0.5);

struct InstanceReport {
  CoverageResult coverage;
  PrecisionRecall pr;
};

InstanceReport instance_metrics(Labeling pred, Labeling gt, std::size_t classes,
                                double thresh = 0.5);

// Point-set IoU of every (predicted, ground-truth) instance pair, dense ids.
struct Overlap {
  std::vector<std::size_t> pred_size;
  std::vector<std::size_t> gt_size;
  std::vector<std::vector<double>> iou;  // [pred][gt]
  std::vector<std::vector<std::size_t>> inter;  // [pred][gt] shared points
  std::vector<std::size_t> pred_class;
  std::vector<std::size_t> gt_class;
};
Overlap overlap(Labeling pred, Labeling gt);

// `key<TAB>value` lines: the seven headline metrics, then per-class entries.
void write_report(std::ostream& out, const SemanticReport& sem, const InstanceReport& ins,
                  const std::vector<std::string>& class_names);

}  // namespace spseg::metrics
