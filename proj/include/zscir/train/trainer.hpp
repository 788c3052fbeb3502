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

#ifndef ZSCIR_TRAIN_TRAINER_HPP_
#define ZSCIR_TRAIN_TRAINER_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "zscir/model/checkpoint.hpp"
#include "zscir/model/embed.hpp"
#include "zscir/pipeline/dataset.hpp"

namespace zscir {

enum class TemperatureMode { kFixed, kLearnable };

struct TrainConfig {
  int batch_size = 32;
  int epochs = 30;
  double learning_rate = 3e-4;
  double weight_decay = 0.1;
  double ema_momentum = 0.996;
  TemperatureMode temperature = TemperatureMode::kFixed;
  uint64_t seed = 0;
  bool shuffle = true;
  bool no_ema = false;
  bool no_cross_attention = false;
  double grad_clip = 0.0;  // 0 disables clipping
  // Late-fusion weight fit after backbone training.
  // Each combiner epoch is one full-batch step on the lambda logit.
  int combiner_epochs = 100;
  double combiner_learning_rate = 0.1;  // initial step on the logit

  // Optimizer values used for the pretrained-backbone setting.
  static TrainConfig PretrainedPreset();

  void Validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);

struct TrainLog {
  std::vector<double> step_loss;
  std::vector<double> epoch_loss;  // mean of the epoch's step losses
  std::vector<double> step_tau;
  std::vector<double> step_seconds;  // wall clock since the start of training
  double lambda = 0.0;

  // One JSON object per line: a "step" record per step, an "epoch" record per
  // epoch.
  void Write(const std::filesystem::path& path) const;
};

// Everything training needs about one triplet, resolved against the collection.
struct TrainingExample {
  const Image* reference = nullptr;
  const Image* target = nullptr;
  std::string text;
};

std::vector<TrainingExample> ResolveExamples(const TripletDataset& dataset, const Collection& collection);

// Mini-batches of example indices for one epoch. A trailing batch of one is
// dropped; a shorter trailing batch is kept.
std::vector<std::vector<size_t>> MakeBatches(size_t n, int batch_size, bool shuffle, uint64_t seed, int epoch);

// Query and target embeddings of one batch with everything needed to
// backpropagate the contrastive loss into the online model.
struct BatchPass {
  Mat queries, targets;
  EmbedCache query_cache;
};

// Forward pass: queries on the online weights; targets through the null-text
// path on the EMA copy, or on the online weights when `online_targets` is set.
// Targets are constants for the loss either way.
BatchPass ForwardBatch(const Checkpoint& ckpt, const std::vector<TrainingExample>& examples,
                       const std::vector<size_t>& batch, bool online_targets);

// Loss and gradient of one batch with respect to every online parameter,
// flowing through the query path only.
double BatchLossAndGradient(const Checkpoint& ckpt, const std::vector<TrainingExample>& examples,
                            const std::vector<size_t>& batch, bool online_targets, Model* grad, double* d_tau);

using StepCallback = std::function<void(int64_t step, double loss)>;

// Trains a fresh model: per step, contrastive loss of online queries against
// (EMA) targets, AdamW on the online weights, then the EMA update.
// Deterministic for a fixed seed.
Checkpoint Train(const TripletDataset& dataset, const Collection& collection, const ModelConfig& model_cfg,
                 const Tokenizer& tokenizer, const TrainConfig& train_cfg, TrainLog* log,
                 const StepCallback& on_step = {});

// Continues training an existing checkpoint with `train_cfg`.
void TrainInPlace(Checkpoint& ckpt, const TripletDataset& dataset, const Collection& collection,
                  const TrainConfig& train_cfg, TrainLog* log, const StepCallback& on_step = {});

// e_f = lambda * e_r + (1 - lambda) * text_pooled. Throws LambdaOutOfRange.
Vec Fuse(const Vec& query, const Vec& text_pooled, double lambda);
Mat FuseRows(const Mat& queries, const Mat& text_pooled, double lambda);

// Frozen-backbone embeddings the combiner is fit on.
struct CombinerData {
  Mat queries;      // e_r
  Mat text_pooled;  // pooled reformulation text
  Mat targets;      // e_t
};

CombinerData ComputeCombinerData(const Checkpoint& ckpt, const TripletDataset& dataset,
                                 const Collection& collection, bool online_targets);

// Mean contrastive loss of the fused queries over the unshuffled batches.
double CombinerObjective(const CombinerData& data, double lambda, double tau, int batch_size);

// Fits lambda only (through a sigmoid-mapped logit) with the contrastive loss
// of e_f against e_t; every other parameter is left bit-identical.
void FinetuneCombiner(Checkpoint& ckpt, const TripletDataset& dataset, const Collection& collection,
                      const TrainConfig& train_cfg, TrainLog* log = nullptr);

}  // namespace zscir

#endif  // ZSCIR_TRAIN_TRAINER_HPP_
