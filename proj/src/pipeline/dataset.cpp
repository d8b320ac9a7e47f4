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

#include "spseg/pipeline/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "spseg/common/error.hpp"
#include "spseg/common/rng.hpp"

namespace spseg::pipeline {

bool is_val_index(std::size_t i) { return i % 5 == 4; }

std::string manifest_to_json(const Manifest& m) {
  nlohmann::ordered_json j;
  j["format"] = "spseg-manifest";
  j["version"] = m.version;
  j["mode"] = m.mode;
  j["seed"] = m.seed;
  j["class_names"] = m.class_names;
  j["train"] = m.train;
  j["val"] = m.val;
  return j.dump(2) + "\n";
}

Manifest manifest_from_json(const std::string& text, const std::string& source) {
  Manifest m;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.value("format", "") != "spseg-manifest") {
      throw ParseError(source, 1, "not a dataset manifest");
    }
    m.version = j.at("version").get<int>();
    if (m.version != 1) throw ParseError(source, 1, "unsupported manifest version");
    m.mode = j.at("mode").get<std::string>();
    if (m.mode != "scene" && m.mode != "shape") throw ParseError(source, 1, "unknown mode");
    m.seed = j.at("seed").get<std::uint64_t>();
    m.class_names = j.at("class_names").get<std::vector<std::string>>();
    m.train = j.at("train").get<std::vector<std::string>>();
    m.val = j.at("val").get<std::vector<std::string>>();
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(source, 1, e.what());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(source, 1, e.what());
  }
  if (m.class_names.size() < 2) throw ParseError(source, 1, "manifest needs at least two classes");
  return m;
}

Manifest generate_dataset(const std::filesystem::path& dir, std::size_t scenes, std::uint64_t seed,
                          const data::SceneSpec& spec) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());

  Manifest m;
  m.mode = spec.mode == data::Mode::shape ? "shape" : "scene";
  m.seed = seed;
  m.class_names = data::class_names(spec.mode);
  for (std::size_t i = 0; i < scenes; ++i) {
    Rng rng = Rng(seed).fork(i);
    const data::Scene s = data::generate_scene(spec, rng);
    char name[48];
    std::snprintf(name, sizeof name, "scene_%04zu.ptsseg", i);
    data::write_ptsseg(dir / name, s);
    (is_val_index(i) ? m.val : m.train).push_back(name);
  }
  std::ofstream out(dir / kManifestName, std::ios::binary);
  if (!out) throw IoError("cannot write " + (dir / kManifestName).string());
  out << manifest_to_json(m);
  if (!out) throw IoError("write failed for " + (dir / kManifestName).string());
  return m;
}

Dataset load_dataset(const std::filesystem::path& dir) {
  const auto path = dir / kManifestName;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  Dataset d;
  d.manifest = manifest_from_json(buf.str(), path.string());
  auto read_all = [&](const std::vector<std::string>& names, std::vector<data::Scene>& out) {
    for (const auto& n : names) {
      data::Scene s = data::read_ptsseg(dir / n);
      if (s.num_classes != d.num_classes()) {
        throw DataError((dir / n).string() + ": class count disagrees with the manifest");
      }
      out.push_back(std::move(s));
    }
  };
  read_all(d.manifest.train, d.train);
  read_all(d.manifest.val, d.val);
  return d;
}

}  // namespace spseg::pipeline
