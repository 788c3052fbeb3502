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


#ifndef ZSCIR_EXPERIMENTS_COMMANDS_HPP_
#define ZSCIR_EXPERIMENTS_COMMANDS_HPP_

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "zscir/eval/report.hpp"
#include "zscir/experiments/run_config.hpp"
#include "zscir/model/checkpoint.hpp"
#include "zscir/pipeline/backends.hpp"
#include "zscir/pipeline/dataset.hpp"
#include "zscir/train/trainer.hpp"

namespace zscir {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntimeError = 1;
inline constexpr int kExitConfigError = 2;

// Library and format versions recorded in manifests.
nlohmann::ordered_json Versions();

// `<artifact>.manifest.json`: artifact hash, command, config hash and
// settings, input hashes and versions.
void WriteManifest(const std::filesystem::path& artifact, std::string_view command, const RunConfig& cfg,
                   const std::vector<std::filesystem::path>& inputs,
                   const nlohmann::ordered_json& extra = nlohmann::ordered_json::object());

std::unique_ptr<CaptionBackend> MakeCaptionBackend(const RunConfig& cfg);
std::unique_ptr<ReformulationBackend> MakeReformulationBackend(const RunConfig& cfg);

// A synthetic world with its training triplets and evaluation cases.
struct Benchmark {
  Collection collection;
  TripletDataset train;
  TripletDataset eval_set;
};

// World from cfg.world, cfg.pairs.n_pairs training triplets, and an
// evaluation set that excludes them.
Benchmark BuildBenchmark(const RunConfig& cfg, CaptionBackend& caption, ReformulationBackend& reform);

// Trains on `train` and evaluates on the benchmark's evaluation set.
struct TrainedRun {
  Checkpoint checkpoint;
  TrainLog log;
  EvalReport report;
};
TrainedRun TrainAndEvaluate(const RunConfig& cfg, const Collection& collection, const TripletDataset& train,
                            const TripletDataset& eval_set);

// Median of a non-empty list (mean of the middle two for even sizes).
double Median(std::vector<double> values);

struct AblationRow {
  std::string variant;                      // full | no_ema | no_cross_attention
  std::vector<std::map<std::string, double>> per_seed;  // e_r metrics per seed
  std::map<std::string, double> median;
};

struct AblationResult {
  std::vector<uint64_t> seeds;
  std::vector<AblationRow> rows;

  const AblationRow& row(std::string_view variant) const;
  // Markdown table of median percentages.
  std::string Table() const;
  nlohmann::ordered_json ToJson() const;
};

// Full model, w/o EMA and w/o cross-attention on identical data for each
// seed of cfg.ablate.seeds, with cfg.ablate.n_pairs training triplets when set.
AblationResult RunAblation(const RunConfig& cfg, CaptionBackend& caption, ReformulationBackend& reform);

struct SweepRow {
  int64_t n_triplets = 0;
  std::vector<std::map<std::string, double>> per_seed;
  std::map<std::string, double> median;
};

struct SweepResult {
  std::vector<uint64_t> seeds;
  std::vector<SweepRow> rows;

  // n_triplets followed by the median percentage of each metric.
  std::string Csv() const;
  // Recall versus log triplet count, one line per recall cut-off.
  std::string PlotPng() const;
  nlohmann::ordered_json ToJson() const;
};

// For each seed, samples the largest count once and trains on nested
// prefixes of it; every count is scored on one shared evaluation set.
SweepResult RunScaleSweep(const RunConfig& cfg, CaptionBackend& caption, ReformulationBackend& reform);

// Commands. Each reads its inputs from cfg.paths and writes its artifacts
// with manifests.
void GenerateDataCommand(const RunConfig& cfg);
void TrainCommand(const RunConfig& cfg);
void FinetuneCombinerCommand(const RunConfig& cfg);
EvalReport EvaluateCommand(const RunConfig& cfg);
void GalleryCommand(const RunConfig& cfg);
SweepResult ScaleSweepCommand(const RunConfig& cfg);
AblationResult AblateCommand(const RunConfig& cfg);

// Command-line entry point. Returns kExitOk, kExitConfigError or
// kExitRuntimeError.
int RunCli(int argc, const char* const* argv);

}  // namespace zscir

#endif  // ZSCIR_EXPERIMENTS_COMMANDS_HPP_
