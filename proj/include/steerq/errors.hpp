// Copyright 2026 The steerq Authors.
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

/**
 * @file errors.hpp
 * Exception types thrown across the library. Everything derives from
 * std::runtime_error or std::invalid_argument so callers can catch broadly.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace steerq {

/// Bad argument to a library call (odd L, index out of range, ...).
class InvalidArgument : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A state lost its normalization beyond repair.
class NumericalCorruption : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Too few samples for the requested estimator.
class InsufficientData : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Least-squares problem without enough spread to determine the fit.
class FitDegenerate : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// The collapse window contains no data for at least one curve.
class EmptyWindow : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// No grid point of a scan produced a usable value.
class AnalysisFailed : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Configuration file problem; carries the offending line when known.
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string &what, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what
                                      : what),
          line_(line) {}
    [[nodiscard]] int line() const noexcept { return line_; }

  private:
    int line_;
};

} // namespace steerq
