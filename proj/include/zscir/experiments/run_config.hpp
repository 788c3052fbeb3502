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


#ifndef ZSCIR_EXPERIMENTS_RUN_CONFIG_HPP_
#define ZSCIR_EXPERIMENTS_RUN_CONFIG_HPP_

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "zscir/eval/report.hpp"
#include "zscir/experiments/world.hpp"
#include "zscir/model/config.hpp"
#include "zscir/pipeline/dataset.hpp"
#include "zscir/pipeline/pairs.hpp"
#include "zscir/train/trainer.hpp"

namespace zscir {

// Artifact locations. Relative paths resolve against `out`.
struct PathsConfig {
  std::string out = "run";
  std::string collection = "collection.jsonl";
  std::string dataset = "triplets.jsonl";
  std::string eval_set = "eval_set.jsonl";
  std::string checkpoint = "model.ckpt";
  std::string metrics = "train_metrics.jsonl";
  std::string report = "report.json";
  std::string gallery = "gallery.html";
  std::string sweep = "scale_sweep";
  std::string ablation = "ablation";

  std::filesystem::path Resolve(const std::string& path) const;
};

struct BackendSelection {
  std::string caption = "oracle";        // oracle | http
  std::string reformulation = "oracle";  // oracle | http
  std::string endpoint;
  std::string caption_model;
  std::string reformulation_model;
  double timeout_seconds = 60.0;
  int max_retries = 3;
  int word_cap = 12;
  int workers = 1;
};

struct EvalConfig {
  EvalSetOptions set;
  EvalProtocol protocol;
  int gallery_top_k = 10;
  std::string gallery_mode = "e_f";
};

struct ScaleSweepSpec {
  std::vector<int64_t> counts = {500, 1000, 2000, 4000};
  std::vector<uint64_t> seeds = {0};
};

struct AblationSpec {
  std::vector<uint64_t> seeds = {0};
  int64_t n_pairs = 0;  // training triplets per run; 0 uses pairs.n_pairs
};

struct RunConfig {
  PathsConfig paths;
  SyntheticWorldConfig world;
  PairSamplingConfig pairs;
  ModelConfig model;
  TrainConfig train;
  EvalConfig eval;
  BackendSelection backend;
  ScaleSweepSpec sweep;
  AblationSpec ablate;

  // Sets the seeds of pair sampling, initialization and training. The world
  // and the evaluation set keep their own seeds.
  void ApplySeed(uint64_t seed);

  void Validate() const;

  // Every setting except `paths`, in a fixed key order.
  nlohmann::ordered_json ToJson() const;
  // SHA-256 of ToJson().
  std::string Hash() const;
};

// Parses a YAML document with the sections paths, world, pairs, model, train,
// eval, backend, sweep and ablate. Unknown sections or keys throw
// InvalidConfig; missing keys keep their defaults.
RunConfig ParseRunConfig(const std::string& yaml);
RunConfig LoadRunConfig(const std::filesystem::path& path);

// Applies `<prefix><SECTION>_<KEY>=value` entries, e.g. ZSCIR_TRAIN_EPOCHS=5.
// Values are parsed as YAML scalars or flow sequences.
inline constexpr const char* kEnvPrefix = "ZSCIR_";
void ApplyOverrides(RunConfig& cfg, const std::map<std::string, std::string>& env,
                    const std::string& prefix = kEnvPrefix);
// Collects the process environment entries that start with `prefix`.
std::map<std::string, std::string> EnvironmentOverrides(const std::string& prefix = kEnvPrefix);

}  // namespace zscir

#endif  // ZSCIR_EXPERIMENTS_RUN_CONFIG_HPP_
