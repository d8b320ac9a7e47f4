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

#include "spseg/model/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "spseg/common/error.hpp"

namespace spseg::model {
namespace {

constexpr const char* kMagic = "PSPCKPT";

void write_le(std::ostream& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  out.write(buf, 8);
}

double read_le(std::istream& in, const std::string& where) {
  unsigned char buf[8];
  if (!in.read(reinterpret_cast<char*>(buf), 8)) {
    throw CheckpointError("checkpoint truncated inside " + where);
  }
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | buf[i];
  return std::bit_cast<double>(bits);
}

std::string read_line(std::istream& in, const char* what) {
  std::string line;
  if (!std::getline(in, line)) throw CheckpointError(std::string("checkpoint truncated before ") + what);
  return line;
}

template <typename T>
T parse_field(const std::string& line, const std::string& key) {
  std::istringstream s(line);
  std::string k;
  T v{};
  if (!(s >> k >> v) || k != key) {
    throw CheckpointError("checkpoint expected '" + key + "' line, got '" + line + "'");
  }
  return v;
}

}  // namespace

void save_checkpoint(const ModelParams& params, std::ostream& out) {
  const std::string arch = params.arch().to_text();
  out << kMagic << '\n'
      << "version " << kCheckpointVersion << '\n'
      << "seed " << params.seed() << '\n'
      << "arch " << arch.size() << '\n'
      << arch << "params " << params.entries().size() << '\n';
  for (const auto& [name, m] : params.entries()) {
    out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (double v : m.values()) write_le(out, v);
    out << '\n';
  }
  if (!out) throw IoError("checkpoint write failed");
}

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path.string());
  save_checkpoint(params, out);
}

ModelParams load_checkpoint(std::istream& in) {
  if (read_line(in, "magic") != kMagic) throw CheckpointError("not a checkpoint (bad magic)");
  const int version = parse_field<int>(read_line(in, "version"), "version");
  if (version != kCheckpointVersion) {
    throw CheckpointError("checkpoint version " + std::to_string(version) + " unsupported (expected " +
                          std::to_string(kCheckpointVersion) + ")");
  }
  const auto seed = parse_field<std::uint64_t>(read_line(in, "seed"), "seed");
  const auto arch_bytes = parse_field<std::size_t>(read_line(in, "arch"), "arch");
  std::string arch_text(arch_bytes, '\0');
  if (!in.read(arch_text.data(), static_cast<std::streamsize>(arch_bytes))) {
    throw CheckpointError("checkpoint truncated inside architecture block");
  }
  Architecture arch;
  try {
    arch = Architecture::from_text(arch_text);
  } catch (const ConfigError& e) {
    throw CheckpointError(std::string("checkpoint architecture invalid: ") + e.what());
  }

  // The architecture fixes every name and shape; the file must supply each once.
  ModelParams expected = init_params(0, arch);
  ModelParams out(arch, seed);
  const auto count = parse_field<std::size_t>(read_line(in, "params"), "params");
  for (std::size_t i = 0; i < count; ++i) {
    std::istringstream header(read_line(in, "parameter header"));
    std::string name;
    std::size_t rows = 0, cols = 0;
    if (!(header >> name >> rows >> cols)) throw CheckpointError("malformed parameter header");
    if (!expected.contains(name)) throw CheckpointError("unknown parameter '" + name + "'");
    const Matrix& shape = expected.get(name);
    if (shape.rows() != rows || shape.cols() != cols) {
      throw CheckpointError("parameter '" + name + "' has shape " + std::to_string(rows) + "x" +
                            std::to_string(cols) + ", architecture expects " + shape.shape_string());
    }
    if (out.contains(name)) throw CheckpointError("parameter '" + name + "' appears twice");
    Matrix m(rows, cols);
    for (double& v : m.values()) v = read_le(in, "parameter '" + name + "'");
    if (in.get() != '\n') throw CheckpointError("checkpoint corrupt after parameter '" + name + "'");
    if (!m.all_finite()) throw CheckpointError("parameter '" + name + "' has non-finite values");
    out.add(name, std::move(m));
  }
  // Keep creation order so a reload saves byte-identically.
  ModelParams ordered(arch, seed);
  for (const auto& [name, m] : expected.entries()) {
    if (!out.contains(name)) throw CheckpointError("checkpoint is missing parameter '" + name + "'");
    ordered.add(name, out.get(name));
  }
  return ordered;
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path.string());
  return load_checkpoint(in);
}

}  // namespace spseg::model
