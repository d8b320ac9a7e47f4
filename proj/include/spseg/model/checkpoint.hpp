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

#include <filesystem>
#include <iosfwd>

#include "spseg/model/model.hpp"

namespace spseg::model {

inline constexpr int kCheckpointVersion = 1;

// Layout: "PSPCKPT" line, version, seed, the architecture text block with its
// byte length, then per parameter a `name rows cols` line followed by
// rows*cols little-endian doubles.
void save_checkpoint(const ModelParams& params, std::ostream& out);
void save_checkpoint(const ModelParams& params, const std::filesystem::path& path);

// Throws CheckpointError on a bad magic/version, truncation, or a parameter
// name or shape the architecture does not define.
ModelParams load_checkpoint(std::istream& in);
ModelParams load_checkpoint(const std::filesystem::path& path);

}  // namespace spseg::model
