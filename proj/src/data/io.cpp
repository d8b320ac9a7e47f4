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

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "spseg/common/error.hpp"
#include "spseg/data/scene.hpp"

namespace spseg::data {
namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

// Reads non-comment lines and splits them into tokens, tracking line numbers.
class LineReader {
 public:
  LineReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  bool next(std::vector<std::string_view>& tokens) {
    while (std::getline(in_, line_)) {
      ++number_;
      if (auto hash = line_.find('#'); hash != std::string::npos) line_.erase(hash);
      tokens.clear();
      std::string_view rest(line_);
      while (!rest.empty()) {
        const auto start = rest.find_first_not_of(" \t\r");
        if (start == std::string_view::npos) break;
        rest.remove_prefix(start);
        const auto end = rest.find_first_of(" \t\r");
        tokens.push_back(rest.substr(0, end));
        rest.remove_prefix(end == std::string_view::npos ? rest.size() : end);
      }
      if (!tokens.empty()) return true;
    }
    ++number_;
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(source_, number_, what); }

  double real(std::string_view tok) const {
    double v = 0.0;
    auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || end != tok.data() + tok.size()) {
      fail("expected a number, got '" + std::string(tok) + "'");
    }
    if (!std::isfinite(v)) fail("non-finite value '" + std::string(tok) + "'");
    return v;
  }

  std::size_t count(std::string_view tok) const {
    std::size_t v = 0;
    auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || end != tok.data() + tok.size()) {
      fail("expected a non-negative integer, got '" + std::string(tok) + "'");
    }
    return v;
  }

 private:
  std::istream& in_;
  std::string source_;
  std::string line_;
  std::size_t number_ = 0;
};

void header(LineReader& r, std::vector<std::string_view>& tok, std::string_view magic,
            std::size_t fields) {
  if (!r.next(tok)) r.fail("empty file");
  if (tok[0] != magic) r.fail("bad magic '" + std::string(tok[0]) + "', expected '" + std::string(magic) + "'");
  if (tok.size() != fields) {
    r.fail("header has " + std::to_string(tok.size()) + " fields, expected " + std::to_string(fields));
  }
  if (r.count(tok[1]) != 1) r.fail("unsupported version " + std::string(tok[1]));
}

}  // namespace

void write_ptsseg(std::ostream& out, const Scene& scene) {
  out << "ptsseg 1 " << scene.size() << ' ' << scene.num_classes << '\n';
  for (std::size_t i = 0; i < scene.size(); ++i) {
    const Point& p = scene.points[i];
    out << fmt(p.x) << ' ' << fmt(p.y) << ' ' << fmt(p.z) << ' ' << fmt(p.r) << ' ' << fmt(p.g)
        << ' ' << fmt(p.b) << ' ' << scene.sem[i] << ' ' << scene.ins[i] << '\n';
  }
}

void write_ptsseg(const std::filesystem::path& path, const Scene& scene) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_ptsseg(out, scene);
  if (!out) throw IoError("write failed: " + path.string());
}

Scene read_ptsseg(std::istream& in, const std::string& source) {
  LineReader r(in, source);
  std::vector<std::string_view> tok;
  header(r, tok, "ptsseg", 4);
  Scene s;
  const std::size_t n = r.count(tok[2]);
  s.num_classes = r.count(tok[3]);
  if (s.num_classes == 0) r.fail("class count must be positive");
  s.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!r.next(tok)) {
      r.fail("truncated: expected " + std::to_string(n) + " points, found " + std::to_string(i));
    }
    if (tok.size() != 8) r.fail("expected 8 fields, got " + std::to_string(tok.size()));
    Point p{r.real(tok[0]), r.real(tok[1]), r.real(tok[2]),
            r.real(tok[3]), r.real(tok[4]), r.real(tok[5])};
    const std::size_t sem = r.count(tok[6]);
    if (sem >= s.num_classes) {
      r.fail("semantic label " + std::to_string(sem) + " out of range for " +
             std::to_string(s.num_classes) + " classes");
    }
    s.points.push_back(p);
    s.sem.push_back(sem);
    s.ins.push_back(r.count(tok[7]));
  }
  if (r.next(tok)) r.fail("unexpected data after " + std::to_string(n) + " points");
  s.fit_bounds();
  return s;
}

Scene read_ptsseg(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_ptsseg(in, path.string());
}

void write_predictions(std::ostream& out, const Matrix& coords, const std::vector<std::size_t>& sem,
                       const std::vector<std::size_t>& ins) {
  if (coords.rows() != sem.size() || sem.size() != ins.size() || (coords.rows() > 0 && coords.cols() != 3)) {
    throw ContractError("write_predictions: coordinate and label counts differ");
  }
  out << "ptspred 1 " << sem.size() << '\n';
  for (std::size_t i = 0; i < sem.size(); ++i) {
    out << fmt(coords(i, 0)) << ' ' << fmt(coords(i, 1)) << ' ' << fmt(coords(i, 2)) << ' '
        << sem[i] << ' ' << ins[i] << '\n';
  }
}

void write_predictions(const std::filesystem::path& path, const Matrix& coords,
                       const std::vector<std::size_t>& sem, const std::vector<std::size_t>& ins) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_predictions(out, coords, sem, ins);
  if (!out) throw IoError("write failed: " + path.string());
}

Predictions read_predictions(std::istream& in, const std::string& source) {
  LineReader r(in, source);
  std::vector<std::string_view> tok;
  header(r, tok, "ptspred", 3);
  const std::size_t n = r.count(tok[2]);
  Predictions p;
  p.coords = Matrix(n, 3);
  for (std::size_t i = 0; i < n; ++i) {
    if (!r.next(tok)) {
      r.fail("truncated: expected " + std::to_string(n) + " points, found " + std::to_string(i));
    }
    if (tok.size() != 5) r.fail("expected 5 fields, got " + std::to_string(tok.size()));
    for (int c = 0; c < 3; ++c) p.coords(i, c) = r.real(tok[c]);
    p.sem.push_back(r.count(tok[3]));
    p.ins.push_back(r.count(tok[4]));
  }
  if (r.next(tok)) r.fail("unexpected data after " + std::to_string(n) + " points");
  return p;
}

Predictions read_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_predictions(in, path.string());
}

}  // namespace spseg::data
