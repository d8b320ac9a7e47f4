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
#include <stdexcept>
#include <string>

namespace spseg {

// Root of every error thrown by the library. The CLI maps subclasses onto
// process exit codes (config -> 2, data/io/parse/checkpoint -> 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape mismatch between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of an operation (log of x <= 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Caller broke a documented precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class SingularMatrixError : public Error {
 public:
  SingularMatrixError(std::size_t pivot_index, double pivot_value)
      : Error("singular matrix: pivot " + std::to_string(pivot_index) +
              " has magnitude " + std::to_string(pivot_value)),
        pivot_index_(pivot_index),
        pivot_value_(pivot_value) {}

  std::size_t pivot_index() const noexcept { return pivot_index_; }
  double pivot_value() const noexcept { return pivot_value_; }

 private:
  std::size_t pivot_index_;
  double pivot_value_;
};

// Affinity graph with an isolated node (zero degree).
class DegenerateGraphError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class IoError : public DataError {
 public:
  using DataError::DataError;
};

class GenerationError : public DataError {
 public:
  using DataError::DataError;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : DataError(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class CheckpointError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace spseg
