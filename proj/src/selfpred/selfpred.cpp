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

#include "spseg/selfpred/selfpred.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <string>

#include "spseg/common/error.hpp"
#include "spseg/losses/losses.hpp"

namespace spseg::selfpred {

Matrix one_hot(std::span<const std::size_t> ids, std::size_t c) {
  Matrix out(ids.size(), c);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= c) {
      throw ContractError("one_hot: id " + std::to_string(ids[i]) + " at row " +
                          std::to_string(i) + " is out of range for " + std::to_string(c) +
                          " classes");
    }
    out(i, ids[i]) = 1.0;
  }
  return out;
}

JointLabels build_joint_labels(std::span<const std::size_t> sem_ids,
                               std::span<const std::size_t> ins_ids, std::size_t c_sem) {
  if (sem_ids.empty()) throw ContractError("build_joint_labels on an empty sample");
  if (sem_ids.size() != ins_ids.size()) {
    throw ContractError("build_joint_labels: " + std::to_string(sem_ids.size()) +
                        " semantic ids vs " + std::to_string(ins_ids.size()) + " instance ids");
  }
  JointLabels out;
  std::map<std::size_t, std::size_t> dense;
  out.ins.reserve(ins_ids.size());
  for (std::size_t id : ins_ids) {
    auto [it, fresh] = dense.emplace(id, dense.size());
    out.ins.push_back(it->second);
  }
  out.c_sem = c_sem;
  out.c_ins = dense.size();
  out.y_sem = one_hot(sem_ids, c_sem);
  out.y_ins = one_hot(out.ins, out.c_ins);
  const std::size_t n = sem_ids.size();
  out.y_joint = Matrix(n, c_sem + out.c_ins);
  for (std::size_t i = 0; i < n; ++i) {
    out.y_joint(i, sem_ids[i]) = 1.0;
    out.y_joint(i, c_sem + out.ins[i]) = 1.0;
  }
  return out;
}

std::vector<std::size_t> divide_groups(std::span<const std::size_t> ins_ids, std::size_t groups,
                                       DivideMode mode, Rng& rng) {
  const std::size_t n = ins_ids.size();
  if (groups < 2) throw ContractError("need at least 2 groups, got " + std::to_string(groups));
  if (groups > n) {
    throw ContractError("cannot divide " + std::to_string(n) + " points into " +
                        std::to_string(groups) + " groups");
  }
  std::vector<std::size_t> group_of(n);
  std::size_t next = 0;
  auto deal = [&](std::vector<std::size_t>& points) {
    rng.shuffle(std::span<std::size_t>(points));
    for (std::size_t p : points) {
      group_of[p] = next;
      next = (next + 1) % groups;
    }
  };
  if (mode == DivideMode::random) {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    deal(all);
    return group_of;
  }
  std::map<std::size_t, std::vector<std::size_t>> by_instance;
  for (std::size_t i = 0; i < n; ++i) by_instance[ins_ids[i]].push_back(i);
  for (auto& [id, points] : by_instance) deal(points);
  return group_of;
}

std::vector<std::pair<std::size_t, std::size_t>> pair_groups(std::size_t groups, Rng& rng) {
  if (groups == 0 || groups % 2 != 0) {
    throw ConfigError("group count must be even and positive, got " + std::to_string(groups));
  }
  std::vector<std::size_t> order(groups);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < groups; i += 2) {
    pairs.emplace_back(std::min(order[i], order[i + 1]), std::max(order[i], order[i + 1]));
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

std::vector<std::vector<std::size_t>> group_members(std::span<const std::size_t> group_of,
                                                    std::size_t groups) {
  std::vector<std::vector<std::size_t>> out(groups);
  for (std::size_t i = 0; i < group_of.size(); ++i) {
    if (group_of[i] >= groups) throw ContractError("group id out of range");
    out[group_of[i]].push_back(i);
  }
  return out;
}

Var build_affinity(Var embeddings, const AffinityOptions& opts) {
  const std::size_t n = embeddings.rows();
  if (n < 2) throw ContractError("affinity graph needs at least 2 points, got " + std::to_string(n));
  if (!(opts.sigma > 0.0)) throw ConfigError("sigma must be positive");
  Var d = ops::pairwise_sq_dist(embeddings);
  if (opts.distance == Distance::euclidean) d = ops::sqrt(d);
  Var w = ops::exp(ops::scale(d, -1.0 / (2.0 * opts.sigma * opts.sigma)));
  if (opts.zero_diagonal) {
    Matrix mask(n, n, 1.0);
    for (std::size_t i = 0; i < n; ++i) mask(i, i) = 0.0;
    w = ops::multiply(w, embeddings.tape().constant(std::move(mask)));
  }
  return w;
}

Var normalize_laplacian(Var w) {
  if (w.rows() != w.cols()) throw DimensionError("laplacian of non-square " + w.value().shape_string());
  Var degree = ops::sum(w, ops::Axis::cols);
  const Matrix& dv = degree.value();
  for (std::size_t i = 0; i < dv.rows(); ++i) {
    if (!(dv[i] > 0.0)) {
      throw DegenerateGraphError("affinity row " + std::to_string(i) + " sums to " +
                                 std::to_string(dv[i]));
    }
  }
  return ops::diag_scale(w, ops::rsqrt(degree));
}

PropagationResult propagate_closed(Var l, const Matrix& s0, const Matrix& u0, double alpha,
                                   std::size_t m) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ConfigError("alpha must lie in (0, 1), got " + std::to_string(alpha));
  }
  const std::size_t n = l.rows();
  if (l.cols() != n) throw DimensionError("propagation operator must be square");
  const bool use_s = !s0.empty();
  const bool use_u = !u0.empty();
  if (!use_s && !use_u) throw ContractError("propagate_closed needs at least one label matrix");
  if ((use_s && s0.rows() != n) || (use_u && u0.rows() != n) ||
      (use_s && use_u && s0.cols() != u0.cols())) {
    throw DimensionError("label matrices do not match the " + std::to_string(n) + "-node graph");
  }
  if (m > n) throw ContractError("labeled split beyond the graph size");

  Tape& tape = l.tape();
  Var a = ops::subtract(tape.constant(Matrix::identity(n)), ops::scale(l, alpha));

  PropagationResult out;
  if (use_s && use_u) {
    // One factorization for both directions.
    const std::size_t c = s0.cols();
    Matrix b(n, 2 * c);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < c; ++j) {
        b(i, j) = s0(i, j);
        b(i, c + j) = u0(i, j);
      }
    }
    Var x = ops::linear_solve(a, tape.constant(std::move(b)));
    out.s_star = ops::slice_cols(x, 0, c);
    out.u_star = ops::slice_cols(x, c, 2 * c);
    Matrix top(n, c), bottom(n, c);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < c; ++j) (i < m ? top : bottom)(i, j) = 1.0;
    }
    out.y_star = ops::add(ops::multiply(out.u_star, tape.constant(std::move(top))),
                          ops::multiply(out.s_star, tape.constant(std::move(bottom))));
  } else if (use_s) {
    out.s_star = ops::linear_solve(a, tape.constant(s0));
  } else {
    out.u_star = ops::linear_solve(a, tape.constant(u0));
  }
  return out;
}

Matrix propagate_iterative(const Matrix& l, const Matrix& s0, double alpha, std::size_t steps) {
  if (l.rows() != l.cols() || s0.rows() != l.rows()) {
    throw DimensionError("propagate_iterative " + l.shape_string() + " with " + s0.shape_string());
  }
  Matrix s = s0;
  for (std::size_t t = 0; t < steps; ++t) {
    Matrix next = matmul(l, s);
    for (std::size_t i = 0; i < next.size(); ++i) next[i] = alpha * next[i] + (1.0 - alpha) * s0[i];
    s = std::move(next);
  }
  return s;
}

PairOutcome pair_loss(Var f_joint, std::span<const std::size_t> sem_ids,
                      std::span<const std::size_t> ins_ids, std::size_t c_sem,
                      std::span<const std::size_t> first, std::span<const std::size_t> second,
                      const SelfPredConfig& cfg, Direction dir) {
  const std::size_t total = f_joint.rows();
  if (sem_ids.size() != total || ins_ids.size() != total) {
    throw ContractError("pair_loss: label count does not match embedding rows");
  }
  if (first.empty() || second.empty()) throw ContractError("pair_loss: empty group");
  std::vector<char> seen(total, 0);
  std::vector<std::size_t> rows;
  rows.reserve(first.size() + second.size());
  for (auto group : {first, second}) {
    for (std::size_t i : group) {
      if (i >= total) throw ContractError("pair_loss: point index out of range");
      if (seen[i]) throw ContractError("pair_loss: groups overlap at point " + std::to_string(i));
      seen[i] = 1;
      rows.push_back(i);
    }
  }
  const std::size_t n = rows.size();
  const std::size_t m = first.size();

  std::vector<std::size_t> sem(n), ins(n);
  for (std::size_t i = 0; i < n; ++i) {
    sem[i] = sem_ids[rows[i]];
    ins[i] = ins_ids[rows[i]];
  }
  PairOutcome out;
  out.labels = build_joint_labels(sem, ins, c_sem);
  const Matrix& y = out.labels.y_joint;

  Var emb = ops::gather_rows(f_joint, rows);
  Var l = normalize_laplacian(build_affinity(emb, cfg.affinity));

  Matrix s0, u0;
  if (dir != Direction::second_labeled) {
    s0 = y;
    for (std::size_t i = m; i < n; ++i) std::fill(s0.row_span(i).begin(), s0.row_span(i).end(), 0.0);
  }
  if (dir != Direction::first_labeled) {
    u0 = y;
    for (std::size_t i = 0; i < m; ++i) std::fill(u0.row_span(i).begin(), u0.row_span(i).end(), 0.0);
  }
  out.prop = propagate_closed(l, s0, u0, cfg.alpha, m);

  Var predicted;
  std::vector<std::size_t> scored;
  switch (dir) {
    case Direction::both:
      predicted = out.prop.y_star;
      scored.resize(n);
      std::iota(scored.begin(), scored.end(), 0);
      break;
    case Direction::first_labeled:
      scored.resize(n - m);
      std::iota(scored.begin(), scored.end(), m);
      predicted = ops::gather_rows(out.prop.s_star, scored);
      break;
    case Direction::second_labeled:
      scored.resize(m);
      std::iota(scored.begin(), scored.end(), 0);
      predicted = ops::gather_rows(out.prop.u_star, scored);
      break;
  }
  Matrix y_sem(scored.size(), c_sem), y_ins(scored.size(), out.labels.c_ins);
  for (std::size_t r = 0; r < scored.size(); ++r) {
    y_sem(r, sem[scored[r]]) = 1.0;
    y_ins(r, out.labels.ins[scored[r]]) = 1.0;
  }
  const std::size_t width = c_sem + out.labels.c_ins;
  Var sem_part = losses::semantic_loss(ops::slice_cols(predicted, 0, c_sem), y_sem);
  Var ins_part = losses::semantic_loss(ops::slice_cols(predicted, c_sem, width), y_ins);
  out.loss = ops::add(sem_part, ins_part);
  return out;
}

Var self_prediction_loss(Var f_joint, std::span<const std::size_t> sem_ids,
                         std::span<const std::size_t> ins_ids, std::size_t c_sem,
                         const SelfPredConfig& cfg, Rng& rng) {
  const auto group_of = divide_groups(ins_ids, cfg.groups, cfg.divide, rng);
  const auto pairs = pair_groups(cfg.groups, rng);
  const auto members = group_members(group_of, cfg.groups);
  Var total;
  for (const auto& [a, b] : pairs) {
    Direction dir = Direction::both;
    if (!cfg.bidirectional) {
      dir = rng.index(2) == 0 ? Direction::first_labeled : Direction::second_labeled;
    }
    Var l = pair_loss(f_joint, sem_ids, ins_ids, c_sem, members[a], members[b], cfg, dir).loss;
    total = total.valid() ? ops::add(total, l) : l;
  }
  return ops::scale(total, 1.0 / static_cast<double>(pairs.size()));
}

}  // namespace spseg::selfpred
