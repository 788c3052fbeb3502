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

#include "zscir/common/error.hpp"

namespace zscir {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kInsufficientPairs: return "InsufficientPairs";
    case ErrorCode::kMissingMetaClass: return "MissingMetaClass";
    case ErrorCode::kBackendUnavailable: return "BackendUnavailable";
    case ErrorCode::kEmptyCaption: return "EmptyCaption";
    case ErrorCode::kEmptyReformulation: return "EmptyReformulation";
    case ErrorCode::kTokenOutOfRange: return "TokenOutOfRange";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kNonPositiveTemperature: return "NonPositiveTemperature";
    case ErrorCode::kDanglingId: return "DanglingId";
    case ErrorCode::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::kLambdaOutOfRange: return "LambdaOutOfRange";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kZeroEmbedding: return "ZeroEmbedding";
    case ErrorCode::kEmptyIndex: return "EmptyIndex";
    case ErrorCode::kMissingRanking: return "MissingRanking";
    case ErrorCode::kGtNotInSubset: return "GtNotInSubset";
    case ErrorCode::kMissingRankedLists: return "MissingRankedLists";
    case ErrorCode::kSchemaTooLarge: return "SchemaTooLarge";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kParse: return "Parse";
  }
  return "Unknown";
}

}  // namespace zscir
