// Copyright 2026 The collapse-sim Authors.
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

#ifndef COLLAPSE_ERROR_HPP_
#define COLLAPSE_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace collapse {

enum class ErrorCode {
  invalid_parameter,
  grid_too_small,
  degenerate_state,
  step_too_large,
  schedule_mismatch,
  grid_mismatch,
  config_violation,
  archive_corrupt,
  io_failure,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_parameter: return "invalid-parameter";
    case ErrorCode::grid_too_small: return "grid-too-small";
    case ErrorCode::degenerate_state: return "degenerate-state";
    case ErrorCode::step_too_large: return "step-too-large";
    case ErrorCode::schedule_mismatch: return "schedule-mismatch";
    case ErrorCode::grid_mismatch: return "grid-mismatch";
    case ErrorCode::config_violation: return "config-violation";
    case ErrorCode::archive_corrupt: return "archive-corrupt";
    case ErrorCode::io_failure: return "io-failure";
  }
  return "unknown";
}

/// Every failure raised by the library carries one of the codes above so that
/// callers (and the CLI) can report it in a machine-parsable way.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

}  // namespace collapse

#endif  // COLLAPSE_ERROR_HPP_
