// Copyright 2026 The xlalign Authors.
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

namespace xlalign {

/// Broad failure classes. The CLI maps these onto process exit codes.
enum class ErrorKind {
  kUsage,      // bad arguments or violated preconditions at an API boundary
  kData,       // malformed or inconsistent input files / shapes
  kNumerical,  // non-convergence, zero norms, rank deficiency
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& message)
      : Error(ErrorKind::kUsage, message) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& message)
      : Error(ErrorKind::kData, message) {}
};

/// Operand shapes do not conform.
class DimensionError : public DataError {
 public:
  using DataError::DataError;
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& message)
      : Error(ErrorKind::kNumerical, message) {}
};

class SvdNotConvergedError : public NumericalError {
 public:
  SvdNotConvergedError(std::size_t sweeps, double residual);

  std::size_t sweeps() const noexcept { return sweeps_; }
  /// Largest remaining off-diagonal cosine between working columns.
  double residual() const noexcept { return residual_; }

 private:
  std::size_t sweeps_;
  double residual_;
};

}  // namespace xlalign
