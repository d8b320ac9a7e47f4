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
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "spseg/common/rng.hpp"
#include "spseg/gradcore/matrix.hpp"

namespace spseg::data {

enum class Mode { scene, shape };

struct Point {
  double x = 0, y = 0, z = 0;
  double r = 0, g = 0, b = 0;
};

struct Scene {
  std::vector<Point> points;
  std::vector<std::size_t> sem;
  std::vector<std::size_t> ins;
  std::size_t num_classes = 0;
  std::array<double, 3> lo{0, 0, 0};  // bounding box used for normalized locations
  std::array<double, 3> hi{1, 1, 1};

  std::size_t size() const noexcept { return points.size(); }
  // Recomputes lo/hi from the points.
  void fit_bounds();
  Matrix coords() const;  // n x 3
};

struct SceneSpec {
  Mode mode = Mode::scene;
  std::array<double, 3> room{2.0, 2.0, 1.5};
  std::size_t min_objects = 2;
  std::size_t max_objects = 5;
  bool walls = true;
  double density = 250.0;        // surface points per square meter
  double color_noise = 0.04;
  double position_noise = 0.004;
  double min_gap = 0.1;          // free space between object footprints
  double sphere_fraction = 0.4;  // share of objects that are spheres
  // Shape mode: points per shape.
  std::size_t shape_points = 1024;
};

const std::vector<std::string>& class_names(Mode mode);

// Floor, optional walls and non-overlapping boxes and spheres on the floor
// (scene mode), or a table/chair assembled from box parts (shape mode).
// GenerationError when the objects cannot be placed.
Scene generate_scene(const SceneSpec& spec, Rng& rng);

// ---- blocks and samples ----

struct Block {
  std::array<double, 2> origin{0, 0};
  double size = 1.0;
  std::vector<std::size_t> indices;  // into the scene, ascending
};

// Grid over x-y starting at the scene's lower bound. stride == size gives a
// partition; a smaller stride gives overlapping blocks. Empty cells are dropped.
std::vector<Block> split_blocks(const Scene& scene, double size = 1.0, double stride = 0.0);

struct Sample {
  Matrix features;                   // n x 9 (scene) or n x 3 (shape)
  std::vector<std::size_t> sem;
  std::vector<std::size_t> ins;      // dense within the sample
  std::vector<std::size_t> source;   // scene index of each row
  std::array<double, 2> origin{0, 0};
};

// n == 0 keeps every point in index order; otherwise n points, without
// replacement when the block is large enough and with replacement (every
// point at least once) when it is not.
Sample sample_block(const Scene& scene, const Block& block, std::size_t n, Mode mode, Rng& rng);

std::size_t input_width(Mode mode);

// ---- files ----

// `ptsseg 1 <N> <C_sem>` then N lines `x y z r g b sem ins`. `#` starts a comment.
void write_ptsseg(std::ostream& out, const Scene& scene);
void write_ptsseg(const std::filesystem::path& path, const Scene& scene);
// ParseError carries the 1-based line number.
Scene read_ptsseg(std::istream& in, const std::string& source = "<stream>");
Scene read_ptsseg(const std::filesystem::path& path);

// `ptspred 1 <N>` then N lines `x y z sem ins`, in input point order.
void write_predictions(std::ostream& out, const Matrix& coords, const std::vector<std::size_t>& sem,
                       const std::vector<std::size_t>& ins);
void write_predictions(const std::filesystem::path& path, const Matrix& coords,
                       const std::vector<std::size_t>& sem, const std::vector<std::size_t>& ins);

struct Predictions {
  Matrix coords;
  std::vector<std::size_t> sem;
  std::vector<std::size_t> ins;
};
Predictions read_predictions(std::istream& in, const std::string& source = "<stream>");
Predictions read_predictions(const std::filesystem::path& path);

}  // namespace spseg::data
