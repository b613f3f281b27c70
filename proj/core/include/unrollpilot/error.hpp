/*
 * Copyright 2026 The UnrollPilot Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace unrollpilot {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A loop nest (or something built from one) violates structural invariants.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> violations);

  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// Runtime fault inside the bytecode interpreter.
class ExecutionError : public Error {
 public:
  ExecutionError(std::size_t instruction_index, const std::string& what);

  std::size_t instruction_index() const noexcept { return instruction_index_; }

 private:
  std::size_t instruction_index_;
};

class InvalidFactorError : public Error {
 public:
  using Error::Error;
};

class UnsupportedLevelError : public Error {
 public:
  using Error::Error;
};

/// Malformed input document. `line` is 1-based when the input is line oriented.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what, std::optional<std::size_t> line = std::nullopt);

  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  std::optional<std::size_t> line_;
};

/// Well-formed input whose shape disagrees with the expected schema.
class SchemaMismatchError : public ParseError {
 public:
  using ParseError::ParseError;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class IncompatibleModelError : public Error {
 public:
  using Error::Error;
};

/// Non-finite loss, gradient or parameter update.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Argument outside a function's mathematical domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace unrollpilot
