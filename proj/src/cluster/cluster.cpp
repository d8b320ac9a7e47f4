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

#include "spseg/cluster/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "spseg/common/error.hpp"
#include "spseg/simd/kernels.hpp"

namespace spseg::cluster {
namespace {

struct Converged {
  std::vector<double> x;
  std::size_t support = 0;
};

}  // namespace

ClusterResult mean_shift(const Matrix& points, const MeanShiftOptions& opts) {
  if (!(opts.bandwidth > 0.0)) throw ConfigError("mean-shift bandwidth must be positive");
  const std::size_t n = points.rows();
  const std::size_t d = points.cols();
  if (n == 0) throw ContractError("mean-shift on an empty point set");
  const auto& k = simd::active();
  const double radius2 = opts.bandwidth * opts.bandwidth;
  const double stop = opts.tolerance * opts.bandwidth;
  const std::size_t stride = std::max<std::size_t>(1, opts.seed_stride);

  std::vector<double> dist(n);
  std::vector<double> next(d);
  std::vector<Converged> found;
  for (std::size_t s = 0; s < n; s += stride) {
    auto row = points.row_span(s);
    std::vector<double> x(row.begin(), row.end());
    std::size_t support = 0;
    for (std::size_t it = 0; it < opts.max_iterations; ++it) {
      k.sq_dist_rows(x.data(), points.data(), n, d, dist.data());
      std::fill(next.begin(), next.end(), 0.0);
      std::size_t count = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (dist[i] <= radius2) {
          k.axpy(1.0, points.row_span(i).data(), next.data(), d);
          ++count;
        }
      }
      if (count == 0) break;
      double shift2 = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        next[c] /= static_cast<double>(count);
        shift2 += (next[c] - x[c]) * (next[c] - x[c]);
      }
      x.swap(next);
      support = count;
      if (std::sqrt(shift2) < stop) break;
    }
    found.push_back({std::move(x), support});
  }

  std::sort(found.begin(), found.end(), [](const Converged& a, const Converged& b) {
    if (a.support != b.support) return a.support > b.support;
    return a.x < b.x;
  });
  const double merge2 = 0.25 * radius2;
  std::vector<std::vector<double>> kept;
  for (const Converged& c : found) {
    bool near = false;
    for (const auto& m : kept) {
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) s += (m[j] - c.x[j]) * (m[j] - c.x[j]);
      if (s < merge2) {
        near = true;
        break;
      }
    }
    if (!near) kept.push_back(c.x);
  }

  Matrix modes(kept.size(), d);
  for (std::size_t m = 0; m < kept.size(); ++m) {
    std::copy(kept[m].begin(), kept[m].end(), modes.row_span(m).begin());
  }
  std::vector<std::size_t> nearest(n, 0);
  std::vector<double> best(n, INFINITY);
  std::vector<double> to_mode(n);
  for (std::size_t m = 0; m < kept.size(); ++m) {
    k.sq_dist_rows(kept[m].data(), points.data(), n, d, to_mode.data());
    for (std::size_t i = 0; i < n; ++i) {
      if (to_mode[i] < best[i]) {
        best[i] = to_mode[i];
        nearest[i] = m;
      }
    }
  }

  // Number clusters by first point so labels do not depend on mode ranking.
  ClusterResult out;
  out.bandwidth = opts.bandwidth;
  std::vector<std::size_t> order(kept.size(), SIZE_MAX);
  std::size_t used = 0;
  out.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (order[nearest[i]] == SIZE_MAX) order[nearest[i]] = used++;
    out.labels[i] = order[nearest[i]];
  }
  out.modes = Matrix(used, d);
  for (std::size_t m = 0; m < kept.size(); ++m) {
    if (order[m] == SIZE_MAX) continue;
    std::copy(kept[m].begin(), kept[m].end(), out.modes.row_span(order[m]).begin());
  }
  return out;
}

BlockMerger::BlockMerger(double cell, double overlap) : cell_(cell), overlap_(overlap) {
  if (!(cell > 0.0)) throw ConfigError("merge cell size must be positive");
  if (!(overlap >= 0.0 && overlap <= 1.0)) throw ConfigError("merge overlap must lie in [0, 1]");
}

std::vector<std::size_t> BlockMerger::merge(const Matrix& coords,
                                            std::span<const std::size_t> local_ins,
                                            std::span<const std::size_t> sem) {
  const std::size_t n = coords.rows();
  if (coords.cols() != 3) throw DimensionError("block merging needs n x 3 coordinates");
  if (local_ins.size() != n || sem.size() != n) {
    throw ContractError("block merging: coordinate and label counts differ");
  }
  if (!coords.all_finite()) throw DataError("block merging: non-finite coordinates");

  const std::vector<std::size_t> dense = relabel_dense(local_ins);
  const std::size_t k = dense.empty() ? 0 : *std::max_element(dense.begin(), dense.end()) + 1;
  const std::vector<std::size_t> cls = instance_sem_label(dense, sem);

  std::vector<Voxel> voxel(n);
  for (std::size_t i = 0; i < n; ++i) {
    voxel[i] = {static_cast<std::int64_t>(std::floor(coords(i, 0) / cell_)),
                static_cast<std::int64_t>(std::floor(coords(i, 1) / cell_)),
                static_cast<std::int64_t>(std::floor(coords(i, 2) / cell_))};
  }
  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t i = 0; i < n; ++i) members[dense[i]].push_back(i);

  // Decide every instance against the registry as it stood before this block,
  // then claim voxels, so the result does not depend on instance order.
  std::vector<std::size_t> chosen(k);
  for (std::size_t inst = 0; inst < k; ++inst) {
    std::map<std::size_t, std::size_t> votes;
    std::size_t covered = 0;
    for (std::size_t i : members[inst]) {
      auto it = owner_.find({voxel[i], cls[inst]});
      if (it == owner_.end()) continue;
      ++votes[it->second];
      ++covered;
    }
    const double size = static_cast<double>(members[inst].size());
    if (covered > 0 && static_cast<double>(covered) >= overlap_ * size) {
      std::size_t best = 0, best_votes = 0;
      for (auto [id, v] : votes) {
        if (v > best_votes) {
          best = id;
          best_votes = v;
        }
      }
      chosen[inst] = best;
    } else {
      chosen[inst] = next_id_++;
    }
  }
  std::vector<std::size_t> out(n);
  for (std::size_t inst = 0; inst < k; ++inst) {
    for (std::size_t i : members[inst]) {
      owner_[{voxel[i], cls[inst]}] = chosen[inst];
      out[i] = chosen[inst];
    }
  }
  return out;
}

std::vector<std::size_t> instance_sem_label(std::span<const std::size_t> instances,
                                            std::span<const std::size_t> sem) {
  if (instances.size() != sem.size()) throw ContractError("instance_sem_label: length mismatch");
  if (instances.empty()) return {};
  const std::size_t k = *std::max_element(instances.begin(), instances.end()) + 1;
  std::vector<std::map<std::size_t, std::size_t>> counts(k);
  for (std::size_t i = 0; i < instances.size(); ++i) ++counts[instances[i]][sem[i]];
  std::vector<std::size_t> out(k, 0);
  for (std::size_t inst = 0; inst < k; ++inst) {
    if (counts[inst].empty()) throw ContractError("instance_sem_label: instance " +
                                                  std::to_string(inst) + " has no points");
    std::size_t best = 0;
    for (auto [c, v] : counts[inst]) {
      if (v > best) {
        best = v;
        out[inst] = c;
      }
    }
  }
  return out;
}

std::vector<std::size_t> relabel_dense(std::span<const std::size_t> ids) {
  std::map<std::size_t, std::size_t> dense;
  std::vector<std::size_t> out(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out[i] = dense.emplace(ids[i], dense.size()).first->second;
  }
  return out;
}

}  // namespace spseg::cluster
