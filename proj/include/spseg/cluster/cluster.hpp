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

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <tuple>
#include <vector>

#include "spseg/gradcore/matrix.hpp"

namespace spseg::cluster {

struct MeanShiftOptions {
  double bandwidth = 0.8;
  std::size_t max_iterations = 300;
  double tolerance = 1e-3;  // relative to bandwidth
  std::size_t seed_stride = 1;  // every k-th point seeds a search
};

struct ClusterResult {
  std::vector<std::size_t> labels;  // dense, numbered by first point
  Matrix modes;                     // one row per cluster
  double bandwidth = 0.0;
};

// Flat-kernel mean-shift over the rows of `points`. Converged seeds are
// ranked by support (points within bandwidth), then coordinates, and a mode
// is kept only if it is at least bandwidth/2 from every mode kept before it.
// Points go to their nearest kept mode, ties to the earlier mode.
ClusterResult mean_shift(const Matrix& points, const MeanShiftOptions& opts = {});

// Scene-level instance ids from per-block instances, via a registry of voxel
// cells owned by global ids. Ownership is kept per semantic class, so only
// instances of the same class can merge.
class BlockMerger {
 public:
  explicit BlockMerger(double cell = 0.5, double overlap = 0.3);

  // coords: n x 3 scene-frame positions. Returns one global id per point.
  // Blocks must be fed in a fixed order; the registry only grows.
  std::vector<std::size_t> merge(const Matrix& coords, std::span<const std::size_t> local_ins,
                                 std::span<const std::size_t> sem);

  std::size_t id_count() const noexcept { return next_id_; }
  double cell() const noexcept { return cell_; }

 private:
  using Voxel = std::tuple<std::int64_t, std::int64_t, std::int64_t>;

  double cell_;
  double overlap_;
  std::size_t next_id_ = 0;
  std::map<std::pair<Voxel, std::size_t>, std::size_t> owner_;  // (voxel, class) -> id
};

// Majority class of the points of each instance, ties to the lower class.
// Instance ids must be dense.
std::vector<std::size_t> instance_sem_label(std::span<const std::size_t> instances,
                                            std::span<const std::size_t> sem);

// Renumbers ids densely by first appearance.
std::vector<std::size_t> relabel_dense(std::span<const std::size_t> ids);

}  // namespace spseg::cluster
