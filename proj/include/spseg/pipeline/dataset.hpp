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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "spseg/data/scene.hpp"

namespace spseg::pipeline {

struct Manifest {
  int version = 1;
  std::string mode = "scene";
  std::uint64_t seed = 0;
  std::vector<std::string> class_names;
  std::vector<std::string> train;  // file names relative to the manifest
  std::vector<std::string> val;
};

struct Dataset {
  Manifest manifest;
  std::vector<data::Scene> train;
  std::vector<data::Scene> val;
  std::size_t num_classes() const { return manifest.class_names.size(); }
};

inline constexpr const char* kManifestName = "manifest.json";

// Every fifth scene (4, 9, 14, ...) goes to validation.
bool is_val_index(std::size_t i);

// Generates `scenes` files named scene_0000.ptsseg, ... plus the manifest.
// Scene i is drawn from its own stream forked off the seed, so scene i does
// not depend on how many scenes are requested.
Manifest generate_dataset(const std::filesystem::path& dir, std::size_t scenes, std::uint64_t seed,
                          const data::SceneSpec& spec);

std::string manifest_to_json(const Manifest& m);
Manifest manifest_from_json(const std::string& text, const std::string& source);

// Throws IoError/ParseError (DataError) on missing or malformed inputs.
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace spseg::pipeline
