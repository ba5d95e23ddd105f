/*
Copyright 2026 The gencs Authors
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

                http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#pragma once

#include <stdexcept>
#include <string>

namespace gencs {

// Mirrors gencs_status in the C header; values must stay in sync.
enum class ErrorCode : int {
  InvalidArgument = 1,
  DimensionMismatch = 2,
  NonFinite = 3,
  MalformedFile = 4,
  DimensionInconsistency = 5,
  UnsupportedActivation = 6,
  ChecksumMismatch = 7,
  Io = 8,
  AllRestartsFailed = 9,
  BudgetExceeded = 10,
  DegenerateSample = 11,
  MissingTruth = 12,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) {
    fail(code, what);
  }
}

}  // namespace gencs
