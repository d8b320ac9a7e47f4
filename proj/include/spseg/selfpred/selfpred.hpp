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
#include <span>
#include <utility>
#include <vector>

#include "spseg/common/rng.hpp"
#include "spseg/gradcore/ops.hpp"

namespace spseg::selfpred {

// ---- labels ----

// Row i has a 1 in column ids[i]. ContractError when an id is >= c.
Matrix one_hot(std::span<const std::size_t> ids, std::size_t c);

struct JointLabels {
  Matrix y_sem;                    // N x c_sem
  Matrix y_ins;                    // N x c_ins
  Matrix y_joint;                  // [y_sem | y_ins]
  std::vector<std::size_t> ins;    // dense instance ids, in order of first appearance
  std::size_t c_sem = 0;
  std::size_t c_ins = 0;
};

// Instance ids are sample-local and remapped to 0..c_ins-1.
JointLabels build_joint_labels(std::span<const std::size_t> sem_ids,
                               std::span<const std::size_t> ins_ids, std::size_t c_sem);

// ---- dividing and pairing ----

enum class DivideMode { stratified, random };

// Group id per point. Stratified mode deals each instance's shuffled points
// round-robin over the groups, continuing the deal where the previous
// instance stopped, so per-instance and overall group sizes differ by at most
// one. Random mode deals one global shuffle.
std::vector<std::size_t> divide_groups(std::span<const std::size_t> ins_ids, std::size_t groups,
                                       DivideMode mode, Rng& rng);

// Uniformly random perfect matching of 0..groups-1. ConfigError for odd counts.
std::vector<std::pair<std::size_t, std::size_t>> pair_groups(std::size_t groups, Rng& rng);

// Point indices of every group, ascending.
std::vector<std::vector<std::size_t>> group_members(std::span<const std::size_t> group_of,
                                                    std::size_t groups);

// ---- graph ----

enum class Distance { squared, euclidean };

struct AffinityOptions {
  double sigma = 1.0;
  Distance distance = Distance::squared;
  // Self-affinity: 0 when true, exp(0) = 1 otherwise.
  bool zero_diagonal = true;
};

// W_ij = exp(-d(x_i, x_j) / (2 sigma^2)) over the rows of the embeddings.
Var build_affinity(Var embeddings, const AffinityOptions& opts = {});

// D^-1/2 W D^-1/2 with D the row sums. DegenerateGraphError if a row sum is <= 0.
Var normalize_laplacian(Var w);

// ---- propagation ----

struct PropagationResult {
  Var s_star;  // (I - alpha L)^-1 S0; invalid when not computed
  Var u_star;  // (I - alpha L)^-1 U0; invalid when not computed
  Var y_star;  // rows [0, m) from u_star, rows [m, n) from s_star; bidirectional only
};

// Closed-form propagation. S0 and U0 are label constants. Either may be an
// empty matrix to skip that direction. ConfigError unless 0 < alpha < 1.
PropagationResult propagate_closed(Var l, const Matrix& s0, const Matrix& u0, double alpha,
                                   std::size_t m);

// T steps of S <- alpha L S + (1 - alpha) S0 starting from S0.
Matrix propagate_iterative(const Matrix& l, const Matrix& s0, double alpha, std::size_t steps);

// ---- self-prediction loss ----

enum class Direction { both, first_labeled, second_labeled };

struct SelfPredConfig {
  double alpha = 0.99;
  AffinityOptions affinity;
  std::size_t groups = 8;
  DivideMode divide = DivideMode::stratified;
  bool bidirectional = true;
};

struct PairOutcome {
  Var loss;                 // 1x1
  PropagationResult prop;   // over the union, first group's rows first
  JointLabels labels;       // over the union, same row order
};

// Propagates over the union of two disjoint point groups of one sample and
// scores the predicted labels of the unlabeled rows by cross-entropy on the
// semantic and instance slices. With Direction::both every row is predicted.
PairOutcome pair_loss(Var f_joint, std::span<const std::size_t> sem_ids,
                      std::span<const std::size_t> ins_ids, std::size_t c_sem,
                      std::span<const std::size_t> first, std::span<const std::size_t> second,
                      const SelfPredConfig& cfg, Direction dir);

// Divides the sample, pairs its groups and averages pair losses in pair order.
// Unidirectional mode draws each pair's direction from rng.
Var self_prediction_loss(Var f_joint, std::span<const std::size_t> sem_ids,
                         std::span<const std::size_t> ins_ids, std::size_t c_sem,
                         const SelfPredConfig& cfg, Rng& rng);

}  // namespace spseg::selfpred
