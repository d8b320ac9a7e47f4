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

#include "spseg/data/scene.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <string>

#include "spseg/common/error.hpp"

namespace spseg::data {
namespace {

constexpr std::size_t kFloor = 0, kWall = 1, kBox = 2, kSphere = 3;
constexpr std::size_t kTop = 0, kLeg = 1, kBack = 2;

struct Color {
  double r, g, b;
};

const Color kSceneColors[] = {{0.55, 0.45, 0.35}, {0.85, 0.85, 0.80}, {0.20, 0.35, 0.70},
                              {0.75, 0.20, 0.20}};

struct Footprint {
  double x0, y0, x1, y1;
  bool overlaps(const Footprint& o, double gap) const {
    return x0 < o.x1 + gap && o.x0 < x1 + gap && y0 < o.y1 + gap && o.y0 < y1 + gap;
  }
  bool contains(double x, double y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
};

class Builder {
 public:
  Builder(Scene& scene, const SceneSpec& spec, Rng& rng) : s_(scene), spec_(spec), rng_(rng) {}

  void begin_instance(std::size_t cls, Color base) {
    cls_ = cls;
    const double tint = 0.05;
    color_ = {base.r + rng_.uniform(-tint, tint), base.g + rng_.uniform(-tint, tint),
              base.b + rng_.uniform(-tint, tint)};
    ins_ = next_ins_++;
  }

  void add(double x, double y, double z) {
    const double pn = spec_.position_noise, cn = spec_.color_noise;
    Point p;
    p.x = x + rng_.uniform(-pn, pn);
    p.y = y + rng_.uniform(-pn, pn);
    p.z = z + rng_.uniform(-pn, pn);
    if (spec_.mode == Mode::scene) {
      p.x = std::clamp(p.x, 0.0, spec_.room[0]);
      p.y = std::clamp(p.y, 0.0, spec_.room[1]);
      p.z = std::clamp(p.z, 0.0, spec_.room[2]);
    }
    p.r = std::clamp(color_.r + rng_.uniform(-cn, cn), 0.0, 1.0);
    p.g = std::clamp(color_.g + rng_.uniform(-cn, cn), 0.0, 1.0);
    p.b = std::clamp(color_.b + rng_.uniform(-cn, cn), 0.0, 1.0);
    s_.points.push_back(p);
    s_.sem.push_back(cls_);
    s_.ins.push_back(ins_);
  }

  std::size_t count_for(double area) const {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(spec_.density * area)));
  }

  // Faces of an axis-aligned box, skipping the bottom. `count` of 0 means by density.
  void box_surface(const std::array<double, 3>& lo, const std::array<double, 3>& hi,
                   std::size_t count = 0) {
    const double dx = hi[0] - lo[0], dy = hi[1] - lo[1], dz = hi[2] - lo[2];
    const double areas[5] = {dx * dy, dx * dz, dx * dz, dy * dz, dy * dz};
    const double total = areas[0] + areas[1] + areas[2] + areas[3] + areas[4];
    const std::size_t n = count == 0 ? count_for(total) : count;
    for (std::size_t i = 0; i < n; ++i) {
      double pick = rng_.uniform(0.0, total);
      std::size_t face = 0;
      while (face < 4 && pick >= areas[face]) pick -= areas[face++];
      const double u = rng_.uniform(), v = rng_.uniform();
      switch (face) {
        case 0: add(lo[0] + u * dx, lo[1] + v * dy, hi[2]); break;
        case 1: add(lo[0] + u * dx, lo[1], lo[2] + v * dz); break;
        case 2: add(lo[0] + u * dx, hi[1], lo[2] + v * dz); break;
        case 3: add(lo[0], lo[1] + u * dy, lo[2] + v * dz); break;
        default: add(hi[0], lo[1] + u * dy, lo[2] + v * dz); break;
      }
    }
  }

  void sphere_surface(double cx, double cy, double cz, double radius) {
    const std::size_t n = count_for(4.0 * std::numbers::pi * radius * radius);
    for (std::size_t i = 0; i < n; ++i) {
      // Uniform on the sphere: z uniform in [-1, 1], azimuth uniform.
      const double z = rng_.uniform(-1.0, 1.0);
      const double phi = rng_.uniform(0.0, 2.0 * std::numbers::pi);
      const double rho = std::sqrt(1.0 - z * z);
      add(cx + radius * rho * std::cos(phi), cy + radius * rho * std::sin(phi), cz + radius * z);
    }
  }

 private:
  Scene& s_;
  const SceneSpec& spec_;
  Rng& rng_;
  std::size_t cls_ = 0;
  std::size_t ins_ = 0;
  std::size_t next_ins_ = 0;
  Color color_{};
};

void generate_room(Scene& scene, const SceneSpec& spec, Rng& rng) {
  const auto& room = spec.room;
  if (spec.min_objects > spec.max_objects) {
    throw GenerationError("min_objects exceeds max_objects");
  }
  const double wall_margin = spec.walls ? 0.05 : 0.0;
  const std::size_t count =
      spec.min_objects + rng.index(spec.max_objects - spec.min_objects + 1);

  struct Object {
    bool box;
    Footprint fp;
    double height;
  };
  // Furniture scales down in small rooms so two objects can stand side by side.
  const double span = std::min(room[0], room[1]) - 2 * wall_margin;
  const double size_hi = std::min(0.6, 0.5 * (span - spec.min_gap));
  const double size_lo = std::min(0.25, 0.6 * size_hi);

  std::vector<Object> objects;
  // A layout that paints itself into a corner is redrawn from scratch.
  for (int layout = 0; layout < 20; ++layout) {
    objects.clear();
    bool complete = size_hi > 0.0;
    for (std::size_t k = 0; k < count && complete; ++k) {
      const bool box = rng.uniform() >= spec.sphere_fraction;
      bool placed = false;
      for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
        double w, d, h;
        if (box) {
          w = rng.uniform(size_lo, size_hi);
          d = rng.uniform(size_lo, size_hi);
          h = rng.uniform(0.2, std::min(0.7, room[2]));
        } else {
          w = d = h = rng.uniform(std::min(0.24, 0.6 * size_hi), std::min(0.5, size_hi));
        }
        const double free_x = room[0] - 2 * wall_margin - w;
        const double free_y = room[1] - 2 * wall_margin - d;
        if (free_x <= 0.0 || free_y <= 0.0 || h > room[2]) continue;
        const double x0 = wall_margin + rng.uniform(0.0, free_x);
        const double y0 = wall_margin + rng.uniform(0.0, free_y);
        Footprint fp{x0, y0, x0 + w, y0 + d};
        placed = std::none_of(objects.begin(), objects.end(),
                              [&](const Object& o) { return o.fp.overlaps(fp, spec.min_gap); });
        if (placed) objects.push_back({box, fp, h});
      }
      complete = placed;
    }
    if (complete) break;
    objects.clear();
  }
  if (objects.size() != count) {
    throw GenerationError("could not place " + std::to_string(count) + " objects in a " +
                          std::to_string(room[0]) + " x " + std::to_string(room[1]) + " room");
  }

  Builder b(scene, spec, rng);
  b.begin_instance(kFloor, kSceneColors[kFloor]);
  const std::size_t floor_points = b.count_for(room[0] * room[1]);
  for (std::size_t i = 0; i < floor_points; ++i) {
    const double x = rng.uniform(0.0, room[0]), y = rng.uniform(0.0, room[1]);
    // Nothing is visible underneath furniture.
    if (std::any_of(objects.begin(), objects.end(),
                    [&](const Object& o) { return o.fp.contains(x, y); })) {
      continue;
    }
    b.add(x, y, 0.0);
  }
  if (spec.walls) {
    b.begin_instance(kWall, kSceneColors[kWall]);
    for (std::size_t i = 0, n = b.count_for(room[0] * room[2]); i < n; ++i) {
      b.add(rng.uniform(0.0, room[0]), 0.0, rng.uniform(0.0, room[2]));
    }
    b.begin_instance(kWall, kSceneColors[kWall]);
    for (std::size_t i = 0, n = b.count_for(room[1] * room[2]); i < n; ++i) {
      b.add(0.0, rng.uniform(0.0, room[1]), rng.uniform(0.0, room[2]));
    }
  }
  for (const Object& o : objects) {
    if (o.box) {
      b.begin_instance(kBox, kSceneColors[kBox]);
      b.box_surface({o.fp.x0, o.fp.y0, 0.0}, {o.fp.x1, o.fp.y1, o.height});
    } else {
      b.begin_instance(kSphere, kSceneColors[kSphere]);
      const double r = 0.5 * (o.fp.x1 - o.fp.x0);
      b.sphere_surface(o.fp.x0 + r, o.fp.y0 + r, r, r);
    }
  }
  scene.lo = {0.0, 0.0, 0.0};
  scene.hi = room;
}

void generate_shape(Scene& scene, const SceneSpec& spec, Rng& rng) {
  const Color colors[] = {{0.6, 0.4, 0.2}, {0.3, 0.3, 0.3}, {0.2, 0.5, 0.3}};
  const bool chair = rng.uniform() < 0.5;
  const double w = rng.uniform(0.6, 1.0), d = rng.uniform(0.6, 1.0), h = rng.uniform(0.5, 0.9);
  const double t = rng.uniform(0.04, 0.08), leg = rng.uniform(0.05, 0.1);

  struct Part {
    std::size_t cls;
    std::array<double, 3> lo, hi;
  };
  std::vector<Part> parts;
  parts.push_back({kTop, {0.0, 0.0, h}, {w, d, h + t}});
  for (int i = 0; i < 4; ++i) {
    const double x = (i & 1) ? w - leg : 0.0, y = (i & 2) ? d - leg : 0.0;
    parts.push_back({kLeg, {x, y, 0.0}, {x + leg, y + leg, h}});
  }
  if (chair) parts.push_back({kBack, {0.0, d - t, h + t}, {w, d, h + t + rng.uniform(0.4, 0.7)}});

  double area_total = 0.0;
  std::vector<double> areas;
  for (const Part& p : parts) {
    const double dx = p.hi[0] - p.lo[0], dy = p.hi[1] - p.lo[1], dz = p.hi[2] - p.lo[2];
    areas.push_back(dx * dy + 2 * dx * dz + 2 * dy * dz);
    area_total += areas.back();
  }
  Builder b(scene, spec, rng);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    b.begin_instance(parts[i].cls, colors[parts[i].cls]);
    const auto n = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(spec.shape_points * areas[i] / area_total)));
    b.box_surface(parts[i].lo, parts[i].hi, n);
  }
  scene.fit_bounds();
}

}  // namespace

void Scene::fit_bounds() {
  if (points.empty()) {
    lo = {0, 0, 0};
    hi = {1, 1, 1};
    return;
  }
  lo = {points[0].x, points[0].y, points[0].z};
  hi = lo;
  for (const Point& p : points) {
    const double c[3] = {p.x, p.y, p.z};
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], c[a]);
      hi[a] = std::max(hi[a], c[a]);
    }
  }
}

Matrix Scene::coords() const {
  Matrix m(points.size(), 3);
  for (std::size_t i = 0; i < points.size(); ++i) {
    m(i, 0) = points[i].x;
    m(i, 1) = points[i].y;
    m(i, 2) = points[i].z;
  }
  return m;
}

const std::vector<std::string>& class_names(Mode mode) {
  static const std::vector<std::string> scene{"floor", "wall", "box", "sphere"};
  static const std::vector<std::string> shape{"top", "leg", "back"};
  return mode == Mode::scene ? scene : shape;
}

Scene generate_scene(const SceneSpec& spec, Rng& rng) {
  for (double r : spec.room) {
    if (!(r > 0.0)) throw GenerationError("room extents must be positive");
  }
  if (!(spec.density > 0.0)) throw GenerationError("point density must be positive");
  Scene scene;
  scene.num_classes = class_names(spec.mode).size();
  if (spec.mode == Mode::scene) {
    generate_room(scene, spec, rng);
  } else {
    generate_shape(scene, spec, rng);
  }
  return scene;
}

std::vector<Block> split_blocks(const Scene& scene, double size, double stride) {
  if (!(size > 0.0)) throw ConfigError("block size must be positive");
  if (stride == 0.0) stride = size;
  if (!(stride > 0.0) || stride > size) throw ConfigError("block stride must lie in (0, size]");
  if (scene.points.empty()) return {};

  const double x0 = scene.lo[0], y0 = scene.lo[1];
  const double span_x = scene.hi[0] - x0, span_y = scene.hi[1] - y0;
  // Enough block origins to cover the bounds; the last row/column may overhang.
  auto steps = [&](double span) {
    if (span <= size) return std::size_t{1};
    return static_cast<std::size_t>(std::ceil((span - size) / stride - 1e-9)) + 1;
  };
  const std::size_t nx = steps(span_x), ny = steps(span_y);

  std::vector<Block> blocks;
  if (stride == size) {
    // Partition: each point goes to exactly one cell, points on the far
    // boundary go to the last cell.
    std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> cells;
    for (std::size_t i = 0; i < scene.points.size(); ++i) {
      auto cell = [&](double v, double origin, std::size_t n) {
        const auto c = static_cast<std::size_t>(std::max(0.0, std::floor((v - origin) / size)));
        return std::min(c, n - 1);
      };
      cells[{cell(scene.points[i].x, x0, nx), cell(scene.points[i].y, y0, ny)}].push_back(i);
    }
    for (auto& [key, idx] : cells) {
      blocks.push_back({{x0 + static_cast<double>(key.first) * size,
                         y0 + static_cast<double>(key.second) * size},
                        size, std::move(idx)});
    }
    return blocks;
  }
  for (std::size_t bx = 0; bx < nx; ++bx) {
    for (std::size_t by = 0; by < ny; ++by) {
      Block b{{x0 + static_cast<double>(bx) * stride, y0 + static_cast<double>(by) * stride}, size, {}};
      const bool last_x = bx + 1 == nx, last_y = by + 1 == ny;
      for (std::size_t i = 0; i < scene.points.size(); ++i) {
        const double dx = scene.points[i].x - b.origin[0];
        const double dy = scene.points[i].y - b.origin[1];
        if (dx >= 0.0 && dy >= 0.0 && (dx < size || (last_x && dx <= size)) &&
            (dy < size || (last_y && dy <= size))) {
          b.indices.push_back(i);
        }
      }
      if (!b.indices.empty()) blocks.push_back(std::move(b));
    }
  }
  return blocks;
}

std::size_t input_width(Mode mode) { return mode == Mode::scene ? 9 : 3; }

Sample sample_block(const Scene& scene, const Block& block, std::size_t n, Mode mode, Rng& rng) {
  const std::size_t m = block.indices.size();
  if (m == 0) throw ContractError("sample_block on an empty block");
  Sample s;
  s.origin = block.origin;
  if (n == 0) {
    s.source = block.indices;
  } else if (m >= n) {
    std::vector<std::size_t> pool = block.indices;
    // Partial Fisher-Yates: the first n slots become a uniform subset.
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.index(m - i));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(n);
    std::sort(pool.begin(), pool.end());
    s.source = std::move(pool);
  } else {
    s.source = block.indices;
    while (s.source.size() < n) s.source.push_back(block.indices[rng.index(m)]);
  }

  const std::size_t rows = s.source.size();
  s.features = Matrix(rows, input_width(mode));
  s.sem.resize(rows);
  s.ins.resize(rows);
  std::map<std::size_t, std::size_t> dense;
  auto norm = [&](double v, int axis) {
    const double ext = scene.hi[axis] - scene.lo[axis];
    return ext > 0.0 ? std::clamp((v - scene.lo[axis]) / ext, 0.0, 1.0) : 0.0;
  };
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t i = s.source[r];
    const Point& p = scene.points[i];
    auto row = s.features.row_span(r);
    if (mode == Mode::scene) {
      row[0] = p.x - block.origin[0];
      row[1] = p.y - block.origin[1];
      row[2] = p.z;
      row[3] = p.r;
      row[4] = p.g;
      row[5] = p.b;
      row[6] = norm(p.x, 0);
      row[7] = norm(p.y, 1);
      row[8] = norm(p.z, 2);
    } else {
      row[0] = norm(p.x, 0);
      row[1] = norm(p.y, 1);
      row[2] = norm(p.z, 2);
    }
    s.sem[r] = scene.sem[i];
    s.ins[r] = dense.emplace(scene.ins[i], dense.size()).first->second;
  }
  return s;
}

}  // namespace spseg::data
