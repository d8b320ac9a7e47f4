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

#include "spseg/pipeline/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "spseg/cluster/cluster.hpp"
#include "spseg/common/error.hpp"
#include "spseg/common/rng.hpp"
#include "spseg/gradcore/ops.hpp"

namespace spseg::pipeline {
namespace {

std::pair<Matrix, Matrix> block_outputs(const model::ModelParams& params, const Matrix& x,
                                        bool with_joint) {
  if (!with_joint) {
    model::Inference r = model::infer(params, x);
    return {std::move(r.f_ins), std::move(r.sem_logits)};
  }
  Tape tape;
  model::BoundModel m(tape, params, false);
  model::FeatureBundle b = model::forward(m, tape.constant(x), true);
  return {b.f_ins.value(), b.sem_logits.value()};
}

// Row softmax with the max subtracted, same arithmetic every call.
void add_softmax(const Matrix& logits, std::size_t r, std::span<double> acc) {
  const auto row = logits.row_span(r);
  const double mx = *std::max_element(row.begin(), row.end());
  double z = 0.0;
  for (double v : row) z += std::exp(v - mx);
  for (std::size_t c = 0; c < row.size(); ++c) acc[c] += std::exp(row[c] - mx) / z;
}

}  // namespace

ScenePrediction predict_scene(const model::ModelParams& params, const RunConfig& cfg,
                              const data::Scene& scene, bool with_joint) {
  if (params.arch().input_width != data::input_width(cfg.data_mode())) {
    throw ConfigError("checkpoint input width does not match the data mode");
  }
  return predict_scene_with(cfg, scene, params.arch().num_classes, [&](const data::Sample& s) {
    return block_outputs(params, s.features, with_joint);
  });
}

ScenePrediction predict_scene_with(const RunConfig& cfg, const data::Scene& scene,
                                   std::size_t classes, const BlockEmbedder& embed) {
  const std::size_t n = scene.size();
  const data::Mode mode = cfg.data_mode();
  const auto blocks = data::split_blocks(scene, cfg.block_size, cfg.infer_stride);
  const Matrix coords = scene.coords();

  cluster::BlockMerger merger(cfg.merge_cell, cfg.merge_overlap);
  Matrix prob(n, classes);
  std::vector<std::map<std::size_t, std::size_t>> votes(n);
  Rng unused(0);
  for (const data::Block& block : blocks) {
    const data::Sample s = data::sample_block(scene, block, 0, mode, unused);
    auto [f_ins, logits] = embed(s);
    if (f_ins.rows() != s.source.size() || logits.rows() != s.source.size() ||
        logits.cols() != classes) {
      throw DimensionError("block embedding has the wrong shape");
    }
    const cluster::ClusterResult cr = cluster::mean_shift(f_ins, cfg.mean_shift());
    const std::vector<std::size_t> sem = row_argmax(logits);
    Matrix bc(s.source.size(), 3);
    for (std::size_t i = 0; i < s.source.size(); ++i) {
      for (std::size_t a = 0; a < 3; ++a) bc(i, a) = coords(s.source[i], a);
    }
    const std::vector<std::size_t> global = merger.merge(bc, cr.labels, sem);
    for (std::size_t i = 0; i < s.source.size(); ++i) {
      const std::size_t p = s.source[i];
      add_softmax(logits, i, prob.row_span(p));
      ++votes[p][global[i]];
    }
  }

  ScenePrediction out;
  out.sem = row_argmax(prob);
  std::vector<std::size_t> ins(n, 0);
  for (std::size_t p = 0; p < n; ++p) {
    if (votes[p].empty()) throw ContractError("inference blocks do not cover every point");
    std::size_t best = 0, count = 0;
    for (const auto& [id, c] : votes[p]) {  // ascending id, so ties go to the lower id
      if (c > count) {
        best = id;
        count = c;
      }
    }
    ins[p] = best;
  }
  out.ins = cluster::relabel_dense(ins);
  return out;
}

Evaluation evaluate_predictions(const std::vector<data::Scene>& scenes,
                                const std::vector<ScenePrediction>& preds,
                                std::size_t num_classes) {
  if (scenes.size() != preds.size()) throw ContractError("one prediction per scene is required");
  std::vector<std::size_t> gt_sem, gt_ins, pr_sem, pr_ins;
  std::size_t gt_off = 0, pr_off = 0;
  for (std::size_t s = 0; s < scenes.size(); ++s) {
    const data::Scene& sc = scenes[s];
    const ScenePrediction& p = preds[s];
    if (p.sem.size() != sc.size() || p.ins.size() != sc.size()) {
      throw ContractError("prediction length differs from the scene");
    }
    const std::vector<std::size_t> g = cluster::relabel_dense(sc.ins);
    std::size_t gmax = 0, pmax = 0;
    for (std::size_t i = 0; i < sc.size(); ++i) {
      gt_sem.push_back(sc.sem[i]);
      gt_ins.push_back(gt_off + g[i]);
      pr_sem.push_back(p.sem[i]);
      pr_ins.push_back(pr_off + p.ins[i]);
      gmax = std::max(gmax, g[i] + 1);
      pmax = std::max(pmax, p.ins[i] + 1);
    }
    gt_off += gmax;
    pr_off += pmax;
  }
  Evaluation ev;
  ev.sem = metrics::semantic_metrics(pr_sem, gt_sem, num_classes);
  ev.ins = metrics::instance_metrics({pr_ins, pr_sem}, {gt_ins, gt_sem}, num_classes);
  ev.summary = {ev.sem.miou, ev.sem.macc, ev.sem.oacc, ev.ins.coverage.mcov,
                ev.ins.coverage.mwcov, ev.ins.pr.mprec, ev.ins.pr.mrec};
  return ev;
}

Evaluation evaluate(const model::ModelParams& params, const RunConfig& cfg,
                    const std::vector<data::Scene>& scenes) {
  std::vector<ScenePrediction> preds;
  preds.reserve(scenes.size());
  for (const auto& s : scenes) preds.push_back(predict_scene(params, cfg, s));
  return evaluate_predictions(scenes, preds, params.arch().num_classes);
}

Evaluation evaluate_oracle(const std::vector<data::Scene>& scenes, std::size_t num_classes) {
  std::vector<ScenePrediction> preds;
  for (const auto& s : scenes) preds.push_back({s.sem, cluster::relabel_dense(s.ins)});
  return evaluate_predictions(scenes, preds, num_classes);
}

void write_evaluation(std::ostream& out, const Evaluation& ev,
                      const std::vector<std::string>& class_names) {
  metrics::write_report(out, ev.sem, ev.ins, class_names);
}

}  // namespace spseg::pipeline
