// Copyright 2026 The psps-planner Authors
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

#ifndef PSPS_ERROR_HPP_
#define PSPS_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace psps {

// Base of every error raised by the library. `kind()` is a stable
// machine-readable tag used in CLI error reports.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept = 0;
};

#define PSPS_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                     \
   public:                                                        \
    using Error::Error;                                           \
    const char* kind() const noexcept override { return #Name; }  \
  }

PSPS_DEFINE_ERROR(ValidationError);
PSPS_DEFINE_ERROR(OutOfExtent);
PSPS_DEFINE_ERROR(NoBin);
PSPS_DEFINE_ERROR(InsufficientHistory);
PSPS_DEFINE_ERROR(ZeroTotal);
PSPS_DEFINE_ERROR(NumericalFailure);
PSPS_DEFINE_ERROR(ModelTooLarge);
PSPS_DEFINE_ERROR(ConfigError);
PSPS_DEFINE_ERROR(DimensionMismatch);
PSPS_DEFINE_ERROR(DegenerateCluster);
PSPS_DEFINE_ERROR(ZeroArea);
PSPS_DEFINE_ERROR(IoError);

#undef PSPS_DEFINE_ERROR

// Malformed input. `line()` is 1-based, or 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, int line = 0)
      : Error(line > 0 ? message + " (line " + std::to_string(line) + ")"
                       : message),
        line_(line) {}
  const char* kind() const noexcept override { return "ParseError"; }
  int line() const noexcept { return line_; }

 private:
  int line_;
};

// A solve ended without a usable solution (infeasible, unbounded, or a
// limit hit with no incumbent).
class SolveFailed : public Error {
 public:
  SolveFailed(const std::string& message, std::string status)
      : Error(message), status_(std::move(status)) {}
  const char* kind() const noexcept override { return "SolveFailed"; }
  const std::string& status() const noexcept { return status_; }

 private:
  std::string status_;
};

}  // namespace psps

#endif  // PSPS_ERROR_HPP_
