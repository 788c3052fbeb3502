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

#include "zscir/train/trainer.hpp"

#include <chrono>
#include <cmath>

#include "zscir/common/error.hpp"
#include "zscir/common/io.hpp"
#include "zscir/common/random.hpp"
#include "zscir/train/loss.hpp"
#include "zscir/train/optimizer.hpp"

namespace zscir {

using nlohmann::json;

TrainConfig TrainConfig::PretrainedPreset() {
  TrainConfig c;
  c.learning_rate = 2e-6;
  c.weight_decay = 0.1;
  c.batch_size = 32;
  return c;
}

void TrainConfig::Validate() const {
  Require(batch_size >= 1, ErrorCode::kInvalidConfig, "batch_size must be at least 1");
  Require(epochs >= 0 && combiner_epochs >= 0, ErrorCode::kInvalidConfig, "epochs must be non-negative");
  Require(learning_rate > 0.0 && combiner_learning_rate > 0.0, ErrorCode::kInvalidConfig,
          "learning rates must be positive");
  Require(weight_decay >= 0.0 && grad_clip >= 0.0, ErrorCode::kInvalidConfig,
          "weight_decay and grad_clip must be non-negative");
  Require(ema_momentum >= 0.0 && ema_momentum <= 1.0, ErrorCode::kInvalidConfig, "ema_momentum must lie in [0, 1]");
}

void to_json(json& j, const TrainConfig& c) {
  j = json{{"batch_size", c.batch_size},
           {"epochs", c.epochs},
           {"learning_rate", c.learning_rate},
           {"weight_decay", c.weight_decay},
           {"ema_momentum", c.ema_momentum},
           {"temperature", c.temperature == TemperatureMode::kFixed ? "fixed" : "learnable"},
           {"seed", c.seed},
           {"shuffle", c.shuffle},
           {"no_ema", c.no_ema},
           {"no_cross_attention", c.no_cross_attention},
           {"grad_clip", c.grad_clip},
           {"combiner_epochs", c.combiner_epochs},
           {"combiner_learning_rate", c.combiner_learning_rate}};
}

void TrainLog::Write(const std::filesystem::path& path) const {
  std::string out;
  for (size_t i = 0; i < step_loss.size(); ++i) {
    json j = {{"kind", "step"}, {"step", i + 1}, {"loss", step_loss[i]}};
    if (i < step_tau.size()) j["tau"] = step_tau[i];
    if (i < step_seconds.size()) j["elapsed_s"] = step_seconds[i];
    out += j.dump() + "\n";
  }
  for (size_t e = 0; e < epoch_loss.size(); ++e)
    out += json({{"kind", "epoch"}, {"epoch", e + 1}, {"mean_loss", epoch_loss[e]}}).dump() + "\n";
  out += json({{"kind", "final"}, {"lambda", lambda}}).dump() + "\n";
  WriteFileAtomic(path, out);
}

std::vector<TrainingExample> ResolveExamples(const TripletDataset& dataset, const Collection& collection) {
  std::vector<TrainingExample> examples;
  examples.reserve(dataset.size());
  for (const Triplet& t : dataset) {
    Require(collection.contains(t.ref_id), ErrorCode::kDanglingId, "dataset references unknown image " + t.ref_id);
    Require(collection.contains(t.target_id), ErrorCode::kDanglingId,
            "dataset references unknown image " + t.target_id);
    examples.push_back({&collection.at(t.ref_id).pixels, &collection.at(t.target_id).pixels, t.reformulation});
  }
  return examples;
}

std::vector<std::vector<size_t>> MakeBatches(size_t n, int batch_size, bool shuffle, uint64_t seed, int epoch) {
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  if (shuffle) {
    Rng rng(Rng::Mix(seed) ^ Rng::Mix(0x5eedULL + static_cast<uint64_t>(epoch)));
    rng.Shuffle(order);
  }
  std::vector<std::vector<size_t>> batches;
  for (size_t begin = 0; begin < n; begin += static_cast<size_t>(batch_size)) {
    const size_t end = std::min(n, begin + static_cast<size_t>(batch_size));
    if (end - begin == 1 && batch_size > 1) break;  // a single example carries no contrast
    batches.emplace_back(order.begin() + begin, order.begin() + end);
  }
  return batches;
}

BatchPass ForwardBatch(const Checkpoint& ckpt, const std::vector<TrainingExample>& examples,
                       const std::vector<size_t>& batch, bool online_targets) {
  std::vector<const Image*> refs, tgts;
  std::vector<TokenSequence> texts;
  for (size_t i : batch) {
    refs.push_back(examples[i].reference);
    tgts.push_back(examples[i].target);
    texts.push_back(ckpt.tokenizer.Encode(examples[i].text, ckpt.config.max_text_len));
  }
  const ModelConfig& cfg = ckpt.config;
  BatchPass pass;
  pass.queries = EmbedBatch(cfg, ckpt.online.text, ckpt.online.visual, ckpt.online.predictor,
                            StackPatches(refs, cfg), TokenBatch::From(texts), &pass.query_cache);
  const TokenBatch null_tokens = TokenBatch::Repeat(Tokenizer::NullText(), static_cast<int>(batch.size()));
  const TextEncoder& text = online_targets ? ckpt.online.text : ckpt.target.text;
  const VisualEncoder& visual = online_targets ? ckpt.online.visual : ckpt.target.visual;
  const Predictor& predictor = online_targets ? ckpt.online.predictor : ckpt.target.predictor;
  pass.targets = EmbedBatch(cfg, text, visual, predictor, StackPatches(tgts, cfg), null_tokens, nullptr);
  return pass;
}

double BatchLossAndGradient(const Checkpoint& ckpt, const std::vector<TrainingExample>& examples,
                            const std::vector<size_t>& batch, bool online_targets, Model* grad, double* d_tau) {
  const BatchPass pass = ForwardBatch(ckpt, examples, batch, online_targets);
  const LossGradient lg = ContrastiveLossGradient(pass.queries, pass.targets, ckpt.tau);
  if (!std::isfinite(lg.loss)) return lg.loss;
  const ModelConfig& cfg = ckpt.config;
  EmbedBatchBackward(cfg, ckpt.online.text, ckpt.online.visual, ckpt.online.predictor, lg.d_queries,
                     pass.query_cache, &grad->text, &grad->visual, &grad->predictor);
  if (d_tau) *d_tau = lg.d_tau;
  return lg.loss;
}

void TrainInPlace(Checkpoint& ckpt, const TripletDataset& dataset, const Collection& collection,
                  const TrainConfig& train_cfg, TrainLog* log, const StepCallback& on_step) {
  train_cfg.Validate();
  Require(!dataset.empty(), ErrorCode::kInvalidConfig, "training dataset is empty");
  const std::vector<TrainingExample> examples = ResolveExamples(dataset, collection);

  AdamW optimizer({train_cfg.learning_rate, train_cfg.weight_decay});
  ScalarAdam tau_optimizer(train_cfg.learning_rate);
  Model grad = ZerosLike(ckpt.online);
  const ParamList params = ckpt.online.Params();
  const ParamList grads = grad.Params();
  const auto start = std::chrono::steady_clock::now();

  for (int epoch = 0; epoch < train_cfg.epochs; ++epoch) {
    double epoch_total = 0.0;
    size_t epoch_steps = 0;
    for (const auto& batch : MakeBatches(examples.size(), train_cfg.batch_size, train_cfg.shuffle, train_cfg.seed, epoch)) {
      for (auto& [name, g] : grads) g->setZero();
      double d_tau = 0.0;
      const double loss = BatchLossAndGradient(ckpt, examples, batch, train_cfg.no_ema, &grad, &d_tau);
      if (!std::isfinite(loss)) {
        Fail(ErrorCode::kNonFiniteLoss, "loss is " + std::to_string(loss) + " at step " + std::to_string(ckpt.step + 1) +
                                            " (epoch " + std::to_string(epoch + 1) + ", tau " + std::to_string(ckpt.tau) + ")");
      }
      if (train_cfg.grad_clip > 0.0) ClipGradNorm(grads, train_cfg.grad_clip);
      optimizer.Step(params, grads);
      if (train_cfg.temperature == TemperatureMode::kLearnable) {
        // Optimized in log space so tau stays positive.
        ckpt.tau = std::exp(tau_optimizer.Step(std::log(ckpt.tau), d_tau * ckpt.tau));
      }
      if (!train_cfg.no_ema) EmaUpdate(ckpt, train_cfg.ema_momentum);
      ++ckpt.step;
      epoch_total += loss;
      ++epoch_steps;
      if (log) {
        log->step_loss.push_back(loss);
        log->step_tau.push_back(ckpt.tau);
        log->step_seconds.push_back(
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
      }
      if (on_step) on_step(ckpt.step, loss);
    }
    if (log) log->epoch_loss.push_back(epoch_steps ? epoch_total / static_cast<double>(epoch_steps) : 0.0);
  }
  if (log) log->lambda = ckpt.lambda;
}

Checkpoint Train(const TripletDataset& dataset, const Collection& collection, const ModelConfig& model_cfg,
                 const Tokenizer& tokenizer, const TrainConfig& train_cfg, TrainLog* log,
                 const StepCallback& on_step) {
  train_cfg.Validate();
  Require(!dataset.empty(), ErrorCode::kInvalidConfig, "training dataset is empty");
  ModelConfig cfg = model_cfg;
  cfg.cross_attention = model_cfg.cross_attention && !train_cfg.no_cross_attention;
  cfg.ema_momentum = train_cfg.ema_momentum;
  Checkpoint ckpt = Checkpoint::Initialize(cfg, tokenizer);
  TrainInPlace(ckpt, dataset, collection, train_cfg, log, on_step);
  return ckpt;
}

Vec Fuse(const Vec& query, const Vec& text_pooled, double lambda) {
  Require(lambda >= 0.0 && lambda <= 1.0, ErrorCode::kLambdaOutOfRange, "lambda must lie in [0, 1]");
  Require(query.size() == text_pooled.size(), ErrorCode::kDimensionMismatch, "fused vectors differ in width");
  return lambda * query + (1.0 - lambda) * text_pooled;
}

Mat FuseRows(const Mat& queries, const Mat& text_pooled, double lambda) {
  Require(lambda >= 0.0 && lambda <= 1.0, ErrorCode::kLambdaOutOfRange, "lambda must lie in [0, 1]");
  Require(queries.rows() == text_pooled.rows() && queries.cols() == text_pooled.cols(), ErrorCode::kDimensionMismatch,
          "fused matrices differ in shape");
  return lambda * queries + (1.0 - lambda) * text_pooled;
}

CombinerData ComputeCombinerData(const Checkpoint& ckpt, const TripletDataset& dataset,
                                 const Collection& collection, bool online_targets) {
  const std::vector<TrainingExample> examples = ResolveExamples(dataset, collection);
  std::vector<const Image*> refs, tgts;
  std::vector<std::string> texts;
  for (const auto& ex : examples) {
    refs.push_back(ex.reference);
    tgts.push_back(ex.target);
    texts.push_back(ex.text);
  }
  CombinerData data;
  data.queries = EmbedQueries(ckpt, refs, texts, &data.text_pooled);
  data.targets = EmbedTargets(ckpt, tgts, !online_targets);
  return data;
}

namespace {

Mat Rows(const Mat& m, const std::vector<size_t>& idx) {
  Mat out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

}  // namespace

double CombinerObjective(const CombinerData& data, double lambda, double tau, int batch_size) {
  const auto batches = MakeBatches(static_cast<size_t>(data.queries.rows()), batch_size, false, 0, 0);
  double total = 0.0;
  for (const auto& batch : batches) {
    total += ContrastiveLoss(FuseRows(Rows(data.queries, batch), Rows(data.text_pooled, batch), lambda),
                             Rows(data.targets, batch), tau);
  }
  return batches.empty() ? 0.0 : total / static_cast<double>(batches.size());
}

void FinetuneCombiner(Checkpoint& ckpt, const TripletDataset& dataset, const Collection& collection,
                      const TrainConfig& train_cfg, TrainLog* log) {
  train_cfg.Validate();
  if (train_cfg.combiner_epochs == 0) return;
  const CombinerData data = ComputeCombinerData(ckpt, dataset, collection, train_cfg.no_ema);
  const auto batches = MakeBatches(static_cast<size_t>(data.queries.rows()), train_cfg.batch_size, false, 0, 0);
  Require(!batches.empty(), ErrorCode::kInvalidConfig, "combiner needs at least two examples");
  constexpr double kMaxLogit = 14.0;  // sigmoid(14) = 1 - 8e-7
  constexpr double kMaxStep = 2.0;
  const double start = std::clamp(ckpt.lambda, 1e-6, 1.0 - 1e-6);
  double logit = std::clamp(std::log(start / (1.0 - start)), -kMaxLogit, kMaxLogit);
  double step = train_cfg.combiner_learning_rate;
  double previous = 0.0;
  // Full-batch sign-adaptive descent on the logit: the step grows while the
  // gradient sign holds and halves when it flips.
  for (int epoch = 0; epoch < train_cfg.combiner_epochs; ++epoch) {
    const double lambda = 1.0 / (1.0 + std::exp(-logit));
    double loss = 0.0, d_lambda = 0.0;
    for (const auto& batch : batches) {
      const Mat q = Rows(data.queries, batch);
      const Mat t = Rows(data.text_pooled, batch);
      const LossGradient lg = ContrastiveLossGradient(FuseRows(q, t, lambda), Rows(data.targets, batch), ckpt.tau);
      Require(std::isfinite(lg.loss), ErrorCode::kNonFiniteLoss, "combiner loss is not finite");
      loss += lg.loss;
      d_lambda += (lg.d_queries.array() * (q - t).array()).sum();
    }
    if (log) log->step_loss.push_back(loss / static_cast<double>(batches.size()));
    const double grad = d_lambda * lambda * (1.0 - lambda);
    if (grad * previous > 0.0) step = std::min(step * 1.2, kMaxStep);
    if (grad * previous < 0.0) step *= 0.5;
    if (grad != 0.0) logit = std::clamp(logit - (grad > 0.0 ? step : -step), -kMaxLogit, kMaxLogit);
    previous = grad;
  }
  ckpt.lambda = 1.0 / (1.0 + std::exp(-logit));
  if (log) log->lambda = ckpt.lambda;
}

}  // namespace zscir
