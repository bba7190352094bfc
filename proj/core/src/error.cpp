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
#include "xlalign/error.hpp"

#include <sstream>

namespace xlalign {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage: return "usage";
    case ErrorKind::kData: return "data";
    case ErrorKind::kNumerical: return "numerical";
  }
  return "unknown";
}

namespace {

std::string not_converged_message(std::size_t sweeps, double residual) {
  std::ostringstream os;
  os << "svd did not converge after " << sweeps
     << " sweeps (max off-diagonal cosine " << residual << ")";
  return os.str();
}

}  // namespace

SvdNotConvergedError::SvdNotConvergedError(std::size_t sweeps, double residual)
    : NumericalError(not_converged_message(sweeps, residual)),
      sweeps_(sweeps),
      residual_(residual) {}

}  // namespace xlalign
