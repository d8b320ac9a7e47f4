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

#include "spseg/metrics/metrics.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <string>
#include <tuple>

#include "spseg/cluster/cluster.hpp"
#include "spseg/common/error.hpp"

namespace spseg::metrics {
namespace {

void check_lengths(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw ContractError(std::string(what) + ": " + std::to_string(a) + " vs " + std::to_string(b) +
                        " labels");
  }
}

void check_labeling(Labeling l, std::size_t n, std::size_t classes, const char* what) {
  check_lengths(l.ins.size(), n, what);
  check_lengths(l.sem.size(), n, what);
  for (std::size_t s : l.sem) {
    if (s >= classes) throw ContractError(std::string(what) + ": semantic id out of range");
  }
}

double mean_over(const std::vector<double>& v, const std::vector<bool>& mask) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (mask[i]) {
      sum += v[i];
      ++count;
    }
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

}  // namespace

SemanticReport semantic_metrics(std::span<const std::size_t> pred, std::span<const std::size_t> gt,
                                std::size_t classes) {
  check_lengths(pred.size(), gt.size(), "semantic_metrics");
  std::vector<std::size_t> tp(classes, 0), fp(classes, 0), fn(classes, 0), support(classes, 0);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] >= classes || gt[i] >= classes) {
      throw ContractError("semantic_metrics: class id out of range at point " + std::to_string(i));
    }
    ++support[gt[i]];
    if (pred[i] == gt[i]) {
      ++tp[gt[i]];
      ++correct;
    } else {
      ++fp[pred[i]];
      ++fn[gt[i]];
    }
  }
  SemanticReport r;
  r.iou.assign(classes, 0.0);
  r.accuracy.assign(classes, 0.0);
  r.in_gt.assign(classes, false);
  r.in_either.assign(classes, false);
  for (std::size_t c = 0; c < classes; ++c) {
    const std::size_t denom = tp[c] + fp[c] + fn[c];
    r.in_either[c] = denom > 0;
    r.in_gt[c] = support[c] > 0;
    if (denom > 0) r.iou[c] = static_cast<double>(tp[c]) / static_cast<double>(denom);
    if (support[c] > 0) r.accuracy[c] = static_cast<double>(tp[c]) / static_cast<double>(support[c]);
  }
  r.miou = mean_over(r.iou, r.in_either);
  r.macc = mean_over(r.accuracy, r.in_gt);
  r.oacc = pred.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(pred.size());
  return r;
}

Overlap overlap(Labeling pred, Labeling gt) {
  const std::size_t n = gt.ins.size();
  const auto p = cluster::relabel_dense(pred.ins);
  const auto g = cluster::relabel_dense(gt.ins);
  Overlap o;
  o.pred_class = cluster::instance_sem_label(p, pred.sem);
  o.gt_class = cluster::instance_sem_label(g, gt.sem);
  o.pred_size.assign(o.pred_class.size(), 0);
  o.gt_size.assign(o.gt_class.size(), 0);
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> inter;
  for (std::size_t i = 0; i < n; ++i) {
    ++o.pred_size[p[i]];
    ++o.gt_size[g[i]];
    ++inter[{p[i], g[i]}];
  }
  o.iou.assign(o.pred_size.size(), std::vector<double>(o.gt_size.size(), 0.0));
  o.inter.assign(o.pred_size.size(), std::vector<std::size_t>(o.gt_size.size(), 0));
  for (auto [key, count] : inter) {
    const auto [pi, gi] = key;
    o.inter[pi][gi] = count;
    const double uni = static_cast<double>(o.pred_size[pi] + o.gt_size[gi] - count);
    o.iou[pi][gi] = static_cast<double>(count) / uni;
  }
  return o;
}

CoverageResult coverage(Labeling pred, Labeling gt, std::size_t classes) {
  const std::size_t n = gt.ins.size();
  if (n == 0) throw ContractError("coverage: empty ground truth");
  check_labeling(gt, n, classes, "coverage");
  check_labeling(pred, n, classes, "coverage");
  const Overlap o = overlap(pred, gt);

  // Sums run in extended precision from integer counts so that short exact
  // fractions such as (2/3 + 1/2) / 2 round once, at the end.
  using Wide = long double;
  std::vector<Wide> cov(classes, 0.0L), wcov(classes, 0.0L);
  CoverageResult r;
  r.in_gt.assign(classes, false);
  std::vector<std::size_t> count(classes, 0), mass(classes, 0);
  for (std::size_t gi = 0; gi < o.gt_size.size(); ++gi) {
    const std::size_t c = o.gt_class[gi];
    Wide best = 0.0L;
    for (std::size_t pi = 0; pi < o.pred_size.size(); ++pi) {
      if (o.pred_class[pi] != c || o.inter[pi][gi] == 0) continue;
      const std::size_t uni = o.pred_size[pi] + o.gt_size[gi] - o.inter[pi][gi];
      best = std::max(best, static_cast<Wide>(o.inter[pi][gi]) / static_cast<Wide>(uni));
    }
    r.in_gt[c] = true;
    cov[c] += best;
    wcov[c] += best * static_cast<Wide>(o.gt_size[gi]);
    ++count[c];
    mass[c] += o.gt_size[gi];
  }
  r.cov.assign(classes, 0.0);
  r.wcov.assign(classes, 0.0);
  Wide mcov = 0.0L, mwcov = 0.0L;
  std::size_t seen = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    if (!r.in_gt[c]) continue;
    cov[c] /= static_cast<Wide>(count[c]);
    wcov[c] /= static_cast<Wide>(mass[c]);
    r.cov[c] = static_cast<double>(cov[c]);
    r.wcov[c] = static_cast<double>(wcov[c]);
    mcov += cov[c];
    mwcov += wcov[c];
    ++seen;
  }
  if (seen > 0) {
    r.mcov = static_cast<double>(mcov / static_cast<Wide>(seen));
    r.mwcov = static_cast<double>(mwcov / static_cast<Wide>(seen));
  }
  return r;
}

PrecisionRecall precision_recall(Labeling pred, Labeling gt, std::size_t classes, double thresh) {
  if (!(thresh > 0.0 && thresh <= 1.0)) {
    throw ConfigError("IoU threshold must lie in (0, 1], got " + std::to_string(thresh));
  }
  const std::size_t n = gt.ins.size();
  if (n == 0) throw ContractError("precision_recall: empty ground truth");
  check_labeling(gt, n, classes, "precision_recall");
  check_labeling(pred, n, classes, "precision_recall");
  const Overlap o = overlap(pred, gt);

  // Candidate pairs in descending IoU; ties by index for a fixed order.
  std::vector<std::tuple<double, std::size_t, std::size_t>> cand;
  for (std::size_t pi = 0; pi < o.pred_size.size(); ++pi) {
    for (std::size_t gi = 0; gi < o.gt_size.size(); ++gi) {
      if (o.pred_class[pi] == o.gt_class[gi] && o.iou[pi][gi] >= thresh) {
        cand.emplace_back(o.iou[pi][gi], pi, gi);
      }
    }
  }
  std::sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
    return std::make_pair(std::get<1>(a), std::get<2>(a)) < std::make_pair(std::get<1>(b), std::get<2>(b));
  });
  std::vector<bool> pred_used(o.pred_size.size(), false), gt_used(o.gt_size.size(), false);
  std::vector<std::size_t> tp(classes, 0), npred(classes, 0), ngt(classes, 0);
  for (auto [iou, pi, gi] : cand) {
    if (pred_used[pi] || gt_used[gi]) continue;
    pred_used[pi] = gt_used[gi] = true;
    ++tp[o.gt_class[gi]];
  }
  for (std::size_t c : o.pred_class) ++npred[c];
  for (std::size_t c : o.gt_class) ++ngt[c];

  PrecisionRecall r;
  r.precision.assign(classes, 0.0);
  r.recall.assign(classes, 0.0);
  r.in_gt.assign(classes, false);
  for (std::size_t c = 0; c < classes; ++c) {
    r.in_gt[c] = ngt[c] > 0;
    if (npred[c] > 0) r.precision[c] = static_cast<double>(tp[c]) / static_cast<double>(npred[c]);
    if (ngt[c] > 0) r.recall[c] = static_cast<double>(tp[c]) / static_cast<double>(ngt[c]);
  }
  r.mprec = mean_over(r.precision, r.in_gt);
  r.mrec = mean_over(r.recall, r.in_gt);
  return r;
}

InstanceReport instance_metrics(Labeling pred, Labeling gt, std::size_t classes, double thresh) {
  return {coverage(pred, gt, classes), precision_recall(pred, gt, classes, thresh)};
}

void write_report(std::ostream& out, const SemanticReport& sem, const InstanceReport& ins,
                  const std::vector<std::string>& class_names) {
  auto line = [&out](const std::string& key, double v) { out << key << '\t' << v << '\n'; };
  const auto old = out.precision(10);
  line("mIoU", sem.miou);
  line("mAcc", sem.macc);
  line("oAcc", sem.oacc);
  line("mPrec", ins.pr.mprec);
  line("mRec", ins.pr.mrec);
  line("mCov", ins.coverage.mcov);
  line("mWCov", ins.coverage.mwcov);
  for (std::size_t c = 0; c < sem.iou.size(); ++c) {
    const std::string name = c < class_names.size() ? class_names[c] : std::to_string(c);
    if (sem.in_either[c]) line("IoU." + name, sem.iou[c]);
    if (sem.in_gt[c]) line("Acc." + name, sem.accuracy[c]);
    if (c < ins.pr.in_gt.size() && ins.pr.in_gt[c]) {
      line("Prec." + name, ins.pr.precision[c]);
      line("Rec." + name, ins.pr.recall[c]);
      line("Cov." + name, ins.coverage.cov[c]);
      line("WCov." + name, ins.coverage.wcov[c]);
    }
  }
  out.precision(old);
}

}  // namespace spseg::metrics
