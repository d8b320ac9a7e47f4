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
#include <string>
#include <utility>
#include <vector>

#include "spseg/data/scene.hpp"
#include "spseg/metrics/metrics.hpp"
#include "spseg/model/model.hpp"
#include "spseg/pipeline/config.hpp"

namespace spseg::pipeline {

struct ScenePrediction {
  std::vector<std::size_t> sem;
  std::vector<std::size_t> ins;  // dense from 0
};

// Blocks of block_size with stride infer_stride, every point of a block fed at
// once, mean-shift on the instance embedding, BlockMerging in block order.
// A point seen by several blocks takes the instance id it received most often
// and the class with the largest summed probability.
// with_joint also evaluates the joint embedding, which must not change
// anything.
ScenePrediction predict_scene(const model::ModelParams& params, const RunConfig& cfg,
                              const data::Scene& scene, bool with_joint = false);

// Per-block (instance embedding, semantic logits) for every row of a sample.
using BlockEmbedder = std::function<std::pair<Matrix, Matrix>(const data::Sample&)>;

// The same clustering and merging path with the network swapped out.
ScenePrediction predict_scene_with(const RunConfig& cfg, const data::Scene& scene,
                                   std::size_t num_classes, const BlockEmbedder& embed);

struct EvalSummary {
  double miou = 0.0;
  double macc = 0.0;
  double oacc = 0.0;
  double mcov = 0.0;
  double mwcov = 0.0;
  double mprec = 0.0;
  double mrec = 0.0;
};

struct Evaluation {
  metrics::SemanticReport sem;
  metrics::InstanceReport ins;
  EvalSummary summary;
};

// Metrics over all scenes at once; instance ids are offset per scene so they
// never collide.
Evaluation evaluate_predictions(const std::vector<data::Scene>& scenes,
                                const std::vector<ScenePrediction>& preds,
                                std::size_t num_classes);

Evaluation evaluate(const model::ModelParams& params, const RunConfig& cfg,
                    const std::vector<data::Scene>& scenes);

// Ground truth scored against itself.
Evaluation evaluate_oracle(const std::vector<data::Scene>& scenes, std::size_t num_classes);

void write_evaluation(std::ostream& out, const Evaluation& ev,
                      const std::vector<std::string>& class_names);

}  // namespace spseg::pipeline
