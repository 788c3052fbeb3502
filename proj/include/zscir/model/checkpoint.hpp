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

#ifndef ZSCIR_MODEL_CHECKPOINT_HPP_
#define ZSCIR_MODEL_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "zscir/model/config.hpp"
#include "zscir/model/network.hpp"
#include "zscir/model/tokenizer.hpp"

namespace zscir {

inline constexpr int kCheckpointFormatVersion = 1;

struct Checkpoint {
  ModelConfig config;
  Tokenizer tokenizer;
  Model online;
  TargetModel target;
  double tau = 10.0;
  double lambda = 0.5;
  int64_t step = 0;

  // Random online weights from config.seed; the target starts as an exact
  // copy of the online visual encoder and predictor.
  static Checkpoint Initialize(const ModelConfig& config, const Tokenizer& tokenizer);

  // Resets the target copy to the online weights.
  void SyncTarget();
};

// Binary archive: magic "ZSCIRCK1", little-endian u64 header length, a JSON
// header (config, vocabulary, step, tau, lambda, array table), then every
// array as raw little-endian float64 in table order.
void SaveCheckpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

// SHA-256 over every online and target parameter (names, shapes, bytes).
// Excludes tau, lambda and the step counter.
std::string BackboneHash(const Checkpoint& ckpt);

// target' = m * target + (1 - m) * online, matched by parameter name.
// Throws ShapeMismatch when a target tensor has no same-shaped online twin.
void EmaUpdate(const ConstParamList& online, const ParamList& target, double m);
void EmaUpdate(Checkpoint& ckpt, double m);

}  // namespace zscir

#endif  // ZSCIR_MODEL_CHECKPOINT_HPP_
