// Copyright 2026 The wignerlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace wignerlab {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands live on different spaces, or a factor label is unknown/duplicated.
class LayoutError : public Error {
 public:
  using Error::Error;
};

/// An argument is outside the operation's domain (index range, unknown
/// eigenvalue, bad count).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Requested space exceeds the configured dimension cap.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A numerical invariant (normalization, orthonormality, unitarity,
/// hermiticity, probability sum) does not hold.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Conditioning on, or collapsing onto, an outcome of probability zero.
class ZeroProbabilityError : public Error {
 public:
  using Error::Error;
};

/// A scenario is structurally invalid. `step()` names the offending step
/// (0-based) when there is one.
class ScenarioError : public Error {
 public:
  explicit ScenarioError(const std::string& what, std::optional<std::size_t> step = std::nullopt)
      : Error(what), step_(step) {}

  std::optional<std::size_t> step() const noexcept { return step_; }

 private:
  std::optional<std::size_t> step_;
};

/// Syntax error in a scenario document. Line and column are 1-based.
class ParseError : public ScenarioError {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what)
      : ScenarioError(std::to_string(line) + ":" + std::to_string(column) +
                      ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace wignerlab
