// Copyright 2026 The ctkkt Authors
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

#include <stdexcept>
#include <string>

namespace ctkkt {

/// Base class for all ctkkt errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Syntax error in an expression string. Carries the byte offset of the
/// offending token within the source text.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, int offset)
      : Error(message + " (at offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  int offset() const noexcept { return offset_; }

 private:
  int offset_;
};

/// Malformed problem file. Carries the 1-based line number.
class FormatError : public Error {
 public:
  FormatError(const std::string& message, int line)
      : Error("line " + std::to_string(line) + ": " + message), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Numerical domain violation while evaluating an expression (log of a
/// non-positive value, square root of a negative value, division by zero).
class EvalError : public Error {
 public:
  EvalError(const std::string& message, int offset)
      : Error(offset >= 0
                  ? message + " (expression offset " + std::to_string(offset) + ")"
                  : message),
        offset_(offset) {}
  int offset() const noexcept { return offset_; }

 private:
  int offset_;
};

/// Incompatible matrix/vector shapes passed to a kernel or aggregate.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// The pointwise solver could not produce a feasible point.
class SolveError : public Error {
 public:
  SolveError(const std::string& message, double best_infeasibility)
      : Error(message), best_infeasibility_(best_infeasibility) {}
  double best_infeasibility() const noexcept { return best_infeasibility_; }

 private:
  double best_infeasibility_ = 0.0;
};

}  // namespace ctkkt
