// Copyright 2026 The zscir Authors.
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

#ifndef ZSCIR_COMMON_ERROR_HPP_
#define ZSCIR_COMMON_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace zscir {

// Every failure the library reports carries one of these codes. The CLI maps
// configuration problems and runtime problems to distinct exit statuses.
enum class ErrorCode {
  kInvalidConfig,
  kInsufficientPairs,
  kMissingMetaClass,
  kBackendUnavailable,
  kEmptyCaption,
  kEmptyReformulation,
  kTokenOutOfRange,
  kDimensionMismatch,
  kShapeMismatch,
  kZeroVector,
  kNonPositiveTemperature,
  kDanglingId,
  kNonFiniteLoss,
  kLambdaOutOfRange,
  kDuplicateId,
  kZeroEmbedding,
  kEmptyIndex,
  kMissingRanking,
  kGtNotInSubset,
  kMissingRankedLists,
  kSchemaTooLarge,
  kIo,
  kParse,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

  // True for errors caused by the user's configuration rather than by data or
  // backends at runtime.
  bool is_config_error() const { return code_ == ErrorCode::kInvalidConfig; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void Require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

}  // namespace zscir

#endif  // ZSCIR_COMMON_ERROR_HPP_
