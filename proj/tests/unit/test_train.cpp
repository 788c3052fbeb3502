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


#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "support/test_support.hpp"
#include "zscir/common/error.hpp"
#include "zscir/common/io.hpp"
#include "zscir/experiments/world.hpp"
#include "zscir/model/embed.hpp"
#include "zscir/pipeline/backends.hpp"
#include "zscir/pipeline/dataset.hpp"
#include "zscir/train/loss.hpp"
#include "zscir/train/optimizer.hpp"
#include "zscir/train/trainer.hpp"

namespace zscir {
namespace {

using testing::BruteForceLoss;
using testing::GradientErrors;
using testing::RandomMat;
using testing::TempDir;
using testing::TinyConfig;

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::kIo;
}

// Synthetic world at 16 px with an oracle-built dataset.
struct Bench {
  Collection collection;
  TripletDataset dataset;
  Tokenizer tokenizer = Tokenizer::ForSchema(AttributeSchema::Default());

  Bench(int image_size, int64_t n_pairs, uint64_t seed = 0) {
    SyntheticWorldConfig wc;
    wc.image_size = image_size;
    collection = GenerateWorld(wc);
    OracleCaptionBackend cap(wc.schema);
    OracleReformulationBackend ref(wc.schema);
    dataset = BuildDataset(collection, {PairStrategy::kSameMetaClass, n_pairs, seed, true}, cap, ref);
  }
};

TrainConfig QuickTrain(int epochs) {
  TrainConfig t;
  t.batch_size = 8;
  t.epochs = epochs;
  t.learning_rate = 1e-3;
  return t;
}

// ---- loss ----

TEST(ContrastiveLoss, SingleExampleIsZero) {
  Rng rng(1);
  for (int i = 0; i < 10; ++i) {
    const Mat r = RandomMat(rng, 1, 5), t = RandomMat(rng, 1, 5);
    EXPECT_EQ(ContrastiveLoss(r, t, 3.0), 0.0);
    const LossGradient g = ContrastiveLossGradient(r, t, 3.0);
    EXPECT_EQ(g.d_queries.norm(), 0.0);
    EXPECT_EQ(g.d_targets.norm(), 0.0);
  }
}

TEST(ContrastiveLoss, OrthonormalClosedForm) {
  const Mat e = Mat::Identity(2, 2);
  EXPECT_NEAR(ContrastiveLoss(e, e, 1.0), std::log(1.0 + std::exp(-1.0)), 1e-12);
  EXPECT_NEAR(ContrastiveLoss(e, e, 1.0), 0.313262, 1e-6);
}

TEST(ContrastiveLoss, MatchesBruteForceOracle) {
  Rng rng(2);
  for (int trial = 0; trial < 1000; ++trial) {
    const int b = 1 + static_cast<int>(rng.Below(16));
    const int d = 1 + static_cast<int>(rng.Below(32));
    const double tau = 0.1 + 20.0 * rng.Uniform();
    const Mat r = RandomMat(rng, b, d), t = RandomMat(rng, b, d);
    const double loss = ContrastiveLoss(r, t, tau);
    ASSERT_NEAR(loss, BruteForceLoss(r, t, tau), 1e-6) << trial;
    ASSERT_GE(loss, 0.0);
    ASSERT_EQ(ContrastiveLossGradient(r, t, tau).loss, loss);
  }
}

TEST(ContrastiveLoss, LargeTemperatureStaysFinite) {
  Rng rng(3);
  const Mat r = RandomMat(rng, 8, 4), t = RandomMat(rng, 8, 4);
  EXPECT_TRUE(std::isfinite(ContrastiveLoss(r, t, 1e4)));
}

TEST(ContrastiveLoss, RowScaleInvariance) {
  Rng rng(4);
  const Mat r = RandomMat(rng, 6, 5), t = RandomMat(rng, 6, 5);
  Mat rs = r, ts = t;
  for (int i = 0; i < 6; ++i) {
    rs.row(i) *= 0.01 + 10 * rng.Uniform();
    ts.row(i) *= 0.01 + 10 * rng.Uniform();
  }
  EXPECT_NEAR(ContrastiveLoss(rs, ts, 5.0), ContrastiveLoss(r, t, 5.0), 1e-12);
}

TEST(ContrastiveLoss, PermutationInvariance) {
  Rng rng(5);
  const Mat r = RandomMat(rng, 7, 3), t = RandomMat(rng, 7, 3);
  std::vector<size_t> order = {6, 2, 4, 0, 1, 5, 3};
  Mat rp(7, 3), tp(7, 3);
  for (int i = 0; i < 7; ++i) {
    rp.row(i) = r.row(static_cast<Eigen::Index>(order[i]));
    tp.row(i) = t.row(static_cast<Eigen::Index>(order[i]));
  }
  EXPECT_NEAR(ContrastiveLoss(rp, tp, 2.0), ContrastiveLoss(r, t, 2.0), 1e-12);
}

TEST(ContrastiveLoss, Errors) {
  const Mat ok = Mat::Identity(2, 2);
  Mat zero = ok;
  zero.row(1).setZero();
  EXPECT_EQ(CodeOf([&] { ContrastiveLoss(zero, ok, 1.0); }), ErrorCode::kZeroVector);
  EXPECT_EQ(CodeOf([&] { ContrastiveLoss(ok, zero, 1.0); }), ErrorCode::kZeroVector);
  EXPECT_EQ(CodeOf([&] { ContrastiveLoss(ok, ok, 0.0); }), ErrorCode::kNonPositiveTemperature);
  EXPECT_EQ(CodeOf([&] { ContrastiveLoss(ok, ok, -1.0); }), ErrorCode::kNonPositiveTemperature);
  EXPECT_EQ(CodeOf([&] { ContrastiveLoss(ok, Mat::Identity(3, 3), 1.0); }), ErrorCode::kDimensionMismatch);
}

TEST(LossGradient, FiniteDifferences) {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const int b = 2 + static_cast<int>(rng.Below(8));
    const int d = 1 + static_cast<int>(rng.Below(10));
    const double tau = 0.5 + 10 * rng.Uniform();
    Mat r = RandomMat(rng, b, d), t = RandomMat(rng, b, d);
    const LossGradient g = ContrastiveLossGradient(r, t, tau);
    Mat dr = g.d_queries, dt = g.d_targets;
    auto f = [&] { return ContrastiveLoss(r, t, tau); };
    for (const auto& [name, err] : GradientErrors({{"r", &r}, {"t", &t}}, {{"r", &dr}, {"t", &dt}}, f))
      EXPECT_LT(err, 1e-6) << name << " trial " << trial;
    const double h = 1e-6;
    const double numeric = (ContrastiveLoss(r, t, tau + h) - ContrastiveLoss(r, t, tau - h)) / (2 * h);
    EXPECT_NEAR(g.d_tau, numeric, 1e-6 * std::max(1.0, std::abs(numeric)));
  }
}

TEST(LossGradient, VanishesAtUniformLimit) {
  const Mat e = Mat::Identity(4, 4);
  const LossGradient g = ContrastiveLossGradient(e, e, 1e-9);
  EXPECT_LT(g.d_queries.norm(), 1e-8);
  EXPECT_LT(g.d_targets.norm(), 1e-8);
}

// ---- gradient through the whole model ----

struct TinyModelCase {
  Bench bench{16, 12};
  Checkpoint ckpt;
  std::vector<TrainingExample> examples;
  std::vector<size_t> batch = {0, 1, 2};

  TinyModelCase() {
    ckpt = Checkpoint::Initialize(TinyConfig(), bench.tokenizer);
    Rng rng(7);
    testing::Perturb(ckpt.online.Params(), rng, 0.1);  // cross-attention outputs start at zero
    testing::Perturb(ckpt.target.Params(), rng, 0.1);
    examples = ResolveExamples(bench.dataset, bench.collection);
  }
};

TEST(ModelGradient, MatchesFiniteDifferencesWithEmaTargets) {
  TinyModelCase c;
  Model grad = ZerosLike(c.ckpt.online);
  double d_tau = 0;
  BatchLossAndGradient(c.ckpt, c.examples, c.batch, false, &grad, &d_tau);
  auto f = [&] {
    const BatchPass pass = ForwardBatch(c.ckpt, c.examples, c.batch, false);
    return ContrastiveLoss(pass.queries, pass.targets, c.ckpt.tau);
  };
  const auto errors = GradientErrors(c.ckpt.online.Params(), grad.Params(), f, 1e-5);
  EXPECT_EQ(errors.size(), c.ckpt.online.Params().size());
  for (const auto& [name, err] : errors) EXPECT_LT(err, 1e-4) << name;
}

TEST(ModelGradient, OnlineTargetsAreConstants) {
  TinyModelCase c;
  Model grad = ZerosLike(c.ckpt.online);
  BatchLossAndGradient(c.ckpt, c.examples, c.batch, true, &grad, nullptr);
  const Mat frozen = ForwardBatch(c.ckpt, c.examples, c.batch, true).targets;
  auto f = [&] {
    return ContrastiveLoss(ForwardBatch(c.ckpt, c.examples, c.batch, true).queries, frozen, c.ckpt.tau);
  };
  for (const auto& [name, err] : GradientErrors(c.ckpt.online.Params(), grad.Params(), f, 1e-5))
    EXPECT_LT(err, 1e-4) << name;
}

TEST(ModelGradient, TargetCopyReceivesNoGradient) {
  // The gradient tree has the online shape only; target weights are read
  // through the stop-gradient path and stay untouched by a step.
  TinyModelCase c;
  const TargetModel before = c.ckpt.target;
  TrainConfig t = QuickTrain(1);
  t.ema_momentum = 1.0;
  TrainInPlace(c.ckpt, c.bench.dataset, c.bench.collection, t, nullptr);
  const auto a = c.ckpt.target.Params();
  const auto b = before.Params();
  for (size_t i = 0; i < a.size(); ++i) EXPECT_EQ(*a[i].second, *b[i].second) << a[i].first;
}

// ---- training loop ----

TEST(Train, ZeroEpochsKeepsInitialization) {
  Bench bench(16, 20);
  TrainConfig t = QuickTrain(0);
  const Checkpoint trained = Train(bench.dataset, bench.collection, TinyConfig(), bench.tokenizer, t, nullptr);
  ModelConfig cfg = TinyConfig();
  cfg.ema_momentum = t.ema_momentum;
  EXPECT_EQ(BackboneHash(trained), BackboneHash(Checkpoint::Initialize(cfg, bench.tokenizer)));
  EXPECT_EQ(trained.step, 0);
}

TEST(Train, DeterministicForFixedSeed) {
  Bench bench(16, 40);
  const TrainConfig t = QuickTrain(2);
  TrainLog a, b;
  const Checkpoint ca = Train(bench.dataset, bench.collection, TinyConfig(), bench.tokenizer, t, &a);
  const Checkpoint cb = Train(bench.dataset, bench.collection, TinyConfig(), bench.tokenizer, t, &b);
  EXPECT_EQ(a.step_loss, b.step_loss);
  EXPECT_EQ(BackboneHash(ca), BackboneHash(cb));
  ASSERT_EQ(a.step_loss.size(), 10u);
  ASSERT_EQ(a.epoch_loss.size(), 2u);
  for (double l : a.step_loss) EXPECT_TRUE(std::isfinite(l) && l >= 0.0);
}

TEST(Train, LogFileHasStepAndEpochRecords) {
  Bench bench(16, 20);
  TrainLog log;
  Train(bench.dataset, bench.collection, TinyConfig(), bench.tokenizer, QuickTrain(2), &log);
  TempDir dir("log");
  log.Write(dir.path() / "m.jsonl");
  const std::string text = ReadFile(dir.path() / "m.jsonl");
  size_t steps = 0, epochs = 0;
  for (const std::string& line : SplitWords(text)) {
    const auto j = nlohmann::json::parse(line);
    if (j.at("kind") == "step") {
      ++steps;
      EXPECT_TRUE(j.contains("loss") && j.contains("tau") && j.contains("elapsed_s"));
    }
    if (j.at("kind") == "epoch") ++epochs;
  }
  EXPECT_EQ(steps, log.step_loss.size());
  EXPECT_EQ(epochs, 2u);
}

TEST(Train, LossDecreasesOnToyConfig) {
  Bench bench(32, 200);
  TrainConfig t;  // desk defaults: B = 32, lr 3e-4
  t.epochs = 30;
  TrainLog log;
  const Checkpoint ckpt = Train(bench.dataset, bench.collection, ModelConfig{}, bench.tokenizer, t, &log);
  ASSERT_EQ(log.epoch_loss.size(), 30u);
  EXPECT_LT(log.epoch_loss.back(), log.epoch_loss.front());

  // Distinct texts on one image give distinct queries after training.
  const Image& img = bench.collection.images().front().pixels;
  const Vec a = EmbedQuery(ckpt, img, "change color from red to blue");
  const Vec b = EmbedQuery(ckpt, img, "change style from none to loose");
  EXPECT_GT((a - b).norm(), 0.0);
}

TEST(Train, NoEmaConverges) {
  Bench bench(16, 120);
  TrainConfig t = QuickTrain(15);
  t.no_ema = true;
  TrainLog log;
  Train(bench.dataset, bench.collection, TinyConfig(), bench.tokenizer, t, &log);
  EXPECT_LT(log.epoch_loss.back(), log.epoch_loss.front());
}

TEST(Train, NoCrossAttentionKeepsTextOutOfTheVisualPath) {
  Bench bench(16, 40);
  TrainConfig t = QuickTrain(3);
  t.no_cross_attention = true;
  const Checkpoint ckpt = Train(bench.dataset, bench.collection, TinyConfig(), bench.tokenizer, t, nullptr);
  EXPECT_FALSE(ckpt.config.cross_attention);
  for (const auto& block : ckpt.online.visual.blocks) {
    EXPECT_EQ(block.cross_attn.o.w.norm(), 0.0);
    EXPECT_EQ(block.cross_attn.o.b.norm(), 0.0);
  }
  const Image& img = bench.collection.images().front().pixels;
  EXPECT_EQ(Encode(ckpt, img, ckpt.tokenizer.Encode("change color from red to blue", 16)).values,
            Encode(ckpt, img, ckpt.tokenizer.Encode("keep the item the same", 16)).values);
  EXPECT_NE(EmbedQuery(ckpt, img, "change color from red to blue"), EmbedQuery(ckpt, img, "keep the item the same"));
}

TEST(Train, NonFiniteLossAborts) {
  Bench bench(16, 20);
  Checkpoint ckpt = Checkpoint::Initialize(TinyConfig(), bench.tokenizer);
  ckpt.online.predictor.fc2.w(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_EQ(CodeOf([&] { TrainInPlace(ckpt, bench.dataset, bench.collection, QuickTrain(1), nullptr); }),
            ErrorCode::kNonFiniteLoss);
}

TEST(Train, DanglingIdAndEmptyDataset) {
  Bench bench(16, 20);
  TripletDataset bad = bench.dataset;
  bad[3].ref_id = "nowhere";
  EXPECT_EQ(CodeOf([&] { Train(bad, bench.collection, TinyConfig(), bench.tokenizer, QuickTrain(1), nullptr); }),
            ErrorCode::kDanglingId);
  EXPECT_EQ(CodeOf([&] { Train({}, bench.collection, TinyConfig(), bench.tokenizer, QuickTrain(1), nullptr); }),
            ErrorCode::kInvalidConfig);
}

TEST(TrainConfig, Validation) {
  TrainConfig t;
  EXPECT_NO_THROW(t.Validate());
  t.learning_rate = 0;
  EXPECT_THROW(t.Validate(), Error);
  t = TrainConfig();
  t.batch_size = 0;
  EXPECT_THROW(t.Validate(), Error);
  t = TrainConfig();
  t.ema_momentum = 2;
  EXPECT_THROW(t.Validate(), Error);
  const TrainConfig pretrained = TrainConfig::PretrainedPreset();
  EXPECT_EQ(pretrained.learning_rate, 2e-6);
  EXPECT_EQ(pretrained.weight_decay, 0.1);
  EXPECT_EQ(pretrained.batch_size, 32);
}

TEST(MakeBatches, CoversEveryIndexAndDropsSingletons) {
  for (size_t n : {0u, 1u, 7u, 32u, 33u, 34u, 100u}) {
    for (bool shuffle : {false, true}) {
      const auto batches = MakeBatches(n, 32, shuffle, 3, 1);
      std::vector<size_t> seen;
      for (const auto& b : batches) {
        EXPECT_GE(b.size(), 2u);
        EXPECT_LE(b.size(), 32u);
        seen.insert(seen.end(), b.begin(), b.end());
      }
      std::sort(seen.begin(), seen.end());
      EXPECT_TRUE(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
      const size_t expected = (n % 32 == 1) ? n - 1 : n;
      EXPECT_EQ(seen.size(), expected) << n;
    }
  }
  EXPECT_EQ(MakeBatches(50, 8, true, 1, 0), MakeBatches(50, 8, true, 1, 0));
  EXPECT_NE(MakeBatches(50, 8, true, 1, 0), MakeBatches(50, 8, true, 1, 1));
  EXPECT_EQ(MakeBatches(5, 2, false, 0, 0), (std::vector<std::vector<size_t>>{{0, 1}, {2, 3}}));
}

// ---- fusion and the combiner ----

TEST(Fuse, Endpoints) {
  Rng rng(8);
  const Vec q = RandomMat(rng, 1, 6), t = RandomMat(rng, 1, 6);
  EXPECT_EQ(Fuse(q, t, 1.0), q);
  EXPECT_EQ(Fuse(q, t, 0.0), t);
  Vec a(2), b(2);
  a << 1, 0;
  b << 0, 1;
  EXPECT_EQ(Fuse(a, b, 0.5), Vec::Constant(2, 0.5));
  EXPECT_EQ(CodeOf([&] { Fuse(q, t, 1.5); }), ErrorCode::kLambdaOutOfRange);
  EXPECT_EQ(CodeOf([&] { Fuse(q, t, -0.1); }), ErrorCode::kLambdaOutOfRange);
  EXPECT_EQ(FuseRows(Mat(q), Mat(t), 1.0), Mat(q));
}

TEST(Combiner, FreezesBackboneAndImprovesOnQueryOnly) {
  Bench bench(16, 120);
  Checkpoint ckpt =
      Train(bench.dataset, bench.collection, TinyConfig(), bench.tokenizer, QuickTrain(5), nullptr);
  const std::string hash = BackboneHash(ckpt);
  const double tau = ckpt.tau;

  TrainConfig t = QuickTrain(0);
  t.combiner_epochs = 0;
  const double lambda0 = ckpt.lambda;
  FinetuneCombiner(ckpt, bench.dataset, bench.collection, t);
  EXPECT_EQ(ckpt.lambda, lambda0);

  t.combiner_epochs = 20;
  FinetuneCombiner(ckpt, bench.dataset, bench.collection, t);
  EXPECT_EQ(BackboneHash(ckpt), hash);
  EXPECT_EQ(ckpt.tau, tau);
  EXPECT_GE(ckpt.lambda, 0.0);
  EXPECT_LE(ckpt.lambda, 1.0);

  const CombinerData data = ComputeCombinerData(ckpt, bench.dataset, bench.collection, false);
  EXPECT_LE(CombinerObjective(data, ckpt.lambda, ckpt.tau, t.batch_size),
            CombinerObjective(data, 1.0, ckpt.tau, t.batch_size) + 1e-3);
}

// ---- optimizers ----

TEST(AdamW, DecaysWeightMatricesOnly) {
  Mat w = Mat::Constant(1, 1, 2.0), b = Mat::Constant(1, 1, 2.0);
  Mat gw = Mat::Zero(1, 1), gb = Mat::Zero(1, 1);
  AdamW opt({0.1, 0.5});
  opt.Step({{"fc.w", &w}, {"fc.b", &b}}, {{"fc.w", &gw}, {"fc.b", &gb}});
  EXPECT_DOUBLE_EQ(w(0, 0), 2.0 * (1 - 0.1 * 0.5));
  EXPECT_DOUBLE_EQ(b(0, 0), 2.0);
  EXPECT_EQ(opt.steps(), 1);
}

TEST(AdamW, FirstStepMovesByLearningRate) {
  // Bias-corrected Adam moves each coordinate by lr * sign(g) on step one.
  Mat p = Mat::Zero(1, 3), g(1, 3);
  g << 0.5, -3.0, 1e-3;
  AdamW opt({0.01, 0.0});
  opt.Step({{"x.b", &p}}, {{"x.b", &g}});
  EXPECT_NEAR(p(0, 0), -0.01, 1e-9);
  EXPECT_NEAR(p(0, 1), 0.01, 1e-9);
  EXPECT_NEAR(p(0, 2), -0.01, 1e-7);
}

TEST(ScalarAdam, MinimizesQuadratic) {
  ScalarAdam opt(0.05);
  double x = 3.0;
  for (int i = 0; i < 2000; ++i) x = opt.Step(x, 2 * (x - 1.0));
  EXPECT_NEAR(x, 1.0, 1e-2);
}

TEST(ClipGradNorm, ScalesToMaxNorm) {
  Mat a(1, 2), b(1, 1);
  a << 3, 0;
  b << 4;
  EXPECT_DOUBLE_EQ(ClipGradNorm({{"a", &a}, {"b", &b}}, 1.0), 5.0);
  EXPECT_NEAR(std::sqrt(a.squaredNorm() + b.squaredNorm()), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(ClipGradNorm({{"a", &a}, {"b", &b}}, 10.0), 1.0);
  EXPECT_NEAR(std::sqrt(a.squaredNorm() + b.squaredNorm()), 1.0, 1e-12);
}

}  // namespace
}  // namespace zscir
