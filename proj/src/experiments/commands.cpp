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


#include "zscir/experiments/commands.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdio>
#include <optional>
#include <sstream>

#include "zscir/common/error.hpp"
#include "zscir/common/io.hpp"
#include "zscir/experiments/plot.hpp"
#include "zscir/experiments/world.hpp"
#include "zscir/model/tokenizer.hpp"

#ifndef ZSCIR_VERSION
#define ZSCIR_VERSION "0.0.0"
#endif

namespace zscir {

namespace {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

void RequireInput(const fs::path& path, std::string_view what) {
  Require(fs::exists(path), ErrorCode::kInvalidConfig,
          std::string(what) + " not found at " + path.string() + "; run the producing command first");
}

void EnsureParent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

BuildOptions BuildOptionsOf(const RunConfig& cfg) {
  return {static_cast<size_t>(cfg.backend.word_cap), cfg.backend.workers};
}

EvalSetOptions EvalSetOptionsOf(const RunConfig& cfg) {
  EvalSetOptions o = cfg.eval.set;
  o.build = BuildOptionsOf(cfg);
  return o;
}

// Protocol for the harnesses: query embeddings only, no stored rankings.
EvalProtocol HarnessProtocol(const RunConfig& cfg) {
  EvalProtocol p = cfg.eval.protocol;
  p.modes = {QueryMode::kQuery};
  p.keep_ranked = 0;
  return p;
}

std::map<std::string, double> MedianMetrics(const std::vector<std::map<std::string, double>>& per_seed) {
  std::map<std::string, double> out;
  for (const auto& [name, unused] : per_seed.front()) {
    std::vector<double> v;
    for (const auto& m : per_seed) v.push_back(m.at(name));
    out[name] = Median(v);
  }
  return out;
}

std::string Pct(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", Percent(fraction));
  return buf;
}

}  // namespace

nlohmann::ordered_json Versions() {
  ojson j;
  j["zscir"] = ZSCIR_VERSION;
  j["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
               std::to_string(EIGEN_MINOR_VERSION);
  j["dataset_schema"] = kDatasetSchemaVersion;
  return j;
}

void WriteManifest(const fs::path& artifact, std::string_view command, const RunConfig& cfg,
                   const std::vector<fs::path>& inputs, const nlohmann::ordered_json& extra) {
  ojson m;
  m["artifact"] = artifact.filename().string();
  m["sha256"] = Sha256File(artifact);
  m["command"] = command;
  m["config_hash"] = cfg.Hash();
  ojson in = ojson::object();
  for (const fs::path& p : inputs) in[p.filename().string()] = Sha256File(p);
  m["inputs"] = in;
  m["versions"] = Versions();
  for (const auto& [k, v] : extra.items()) m[k] = v;
  m["config"] = cfg.ToJson();
  WriteFileAtomic(ManifestPath(artifact), m.dump(2) + "\n");
}

std::unique_ptr<CaptionBackend> MakeCaptionBackend(const RunConfig& cfg) {
  if (cfg.backend.caption == "oracle") return std::make_unique<OracleCaptionBackend>(cfg.world.schema);
  return std::make_unique<HttpChatBackend>(HttpBackendConfig{cfg.backend.endpoint, cfg.backend.caption_model,
                                                             cfg.backend.timeout_seconds, cfg.backend.max_retries});
}

std::unique_ptr<ReformulationBackend> MakeReformulationBackend(const RunConfig& cfg) {
  if (cfg.backend.reformulation == "oracle") {
    return std::make_unique<OracleReformulationBackend>(cfg.world.schema, static_cast<size_t>(cfg.backend.word_cap));
  }
  return std::make_unique<HttpChatBackend>(HttpBackendConfig{
      cfg.backend.endpoint, cfg.backend.reformulation_model, cfg.backend.timeout_seconds, cfg.backend.max_retries});
}

Benchmark BuildBenchmark(const RunConfig& cfg, CaptionBackend& caption, ReformulationBackend& reform) {
  Benchmark b;
  b.collection = GenerateWorld(cfg.world);
  b.train = BuildDataset(b.collection, cfg.pairs, caption, reform, BuildOptionsOf(cfg));
  b.eval_set = BuildEvalSet(b.collection, b.train, caption, reform, EvalSetOptionsOf(cfg));
  return b;
}

TrainedRun TrainAndEvaluate(const RunConfig& cfg, const Collection& collection, const TripletDataset& train,
                            const TripletDataset& eval_set) {
  TrainedRun run;
  const Tokenizer tokenizer = Tokenizer::ForSchema(cfg.world.schema);
  run.checkpoint = Train(train, collection, cfg.model, tokenizer, cfg.train, &run.log);
  run.report = Evaluate(run.checkpoint, collection, CasesFromDataset(eval_set), HarnessProtocol(cfg));
  run.report.config_hash = cfg.Hash();
  return run;
}

double Median(std::vector<double> values) {
  Require(!values.empty(), ErrorCode::kInvalidConfig, "median of an empty list");
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

const AblationRow& AblationResult::row(std::string_view variant) const {
  for (const AblationRow& r : rows) {
    if (r.variant == variant) return r;
  }
  Fail(ErrorCode::kInvalidConfig, "no ablation variant " + std::string(variant));
}

std::string AblationResult::Table() const {
  std::ostringstream out;
  std::vector<std::string> names;
  for (const auto& [name, unused] : rows.front().median) names.push_back(name);
  out << "| variant |";
  for (const std::string& n : names) out << " " << n << " |";
  out << " R@1 per seed |\n|---|";
  for (size_t i = 0; i < names.size(); ++i) out << "---|";
  out << "---|\n";
  for (const AblationRow& r : rows) {
    out << "| " << r.variant << " |";
    for (const std::string& n : names) out << " " << Pct(r.median.at(n)) << " |";
    out << " ";
    for (size_t s = 0; s < r.per_seed.size(); ++s) out << (s ? " / " : "") << Pct(r.per_seed[s].at("R@1"));
    out << " |\n";
  }
  return out.str();
}

nlohmann::ordered_json AblationResult::ToJson() const {
  ojson j;
  j["seeds"] = seeds;
  ojson rs = ojson::array();
  for (const AblationRow& r : rows) {
    ojson per_seed = ojson::array();
    for (const auto& m : r.per_seed) per_seed.push_back(m);
    rs.push_back({{"variant", r.variant}, {"median", r.median}, {"per_seed", per_seed}});
  }
  j["rows"] = rs;
  return j;
}

AblationResult RunAblation(const RunConfig& cfg, CaptionBackend& caption, ReformulationBackend& reform) {
  cfg.Validate();
  AblationResult result;
  result.seeds = cfg.ablate.seeds;
  result.rows = {{"full", {}, {}}, {"no_ema", {}, {}}, {"no_cross_attention", {}, {}}};
  for (uint64_t seed : cfg.ablate.seeds) {
    RunConfig base = cfg;
    base.ApplySeed(seed);
    if (cfg.ablate.n_pairs > 0) base.pairs.n_pairs = cfg.ablate.n_pairs;
    const Benchmark bench = BuildBenchmark(base, caption, reform);
    for (AblationRow& row : result.rows) {
      RunConfig c = base;
      c.train.no_ema = row.variant == "no_ema";
      c.train.no_cross_attention = row.variant == "no_cross_attention";
      const TrainedRun run = TrainAndEvaluate(c, bench.collection, bench.train, bench.eval_set);
      row.per_seed.push_back(run.report.mode("e_r").metrics);
      spdlog::info("ablate seed {} {}: R@1 {}", seed, row.variant, Pct(row.per_seed.back().at("R@1")));
    }
  }
  for (AblationRow& row : result.rows) row.median = MedianMetrics(row.per_seed);
  return result;
}

std::string SweepResult::Csv() const {
  std::ostringstream out;
  std::vector<std::string> names;
  for (const auto& [name, unused] : rows.front().median) names.push_back(name);
  out << "n_triplets";
  for (const std::string& n : names) out << "," << n;
  for (uint64_t s : seeds) out << ",R@1_seed" << s;
  out << "\n";
  for (const SweepRow& r : rows) {
    out << r.n_triplets;
    for (const std::string& n : names) out << "," << Pct(r.median.at(n));
    for (const auto& m : r.per_seed) out << "," << Pct(m.at("R@1"));
    out << "\n";
  }
  return out.str();
}

std::string SweepResult::PlotPng() const {
  std::vector<double> x;
  for (const SweepRow& r : rows) x.push_back(static_cast<double>(r.n_triplets));
  const std::vector<std::pair<std::string, std::array<double, 3>>> lines = {
      {"R@1", {0.8, 0.1, 0.1}}, {"R@5", {0.1, 0.4, 0.8}}, {"R@10", {0.1, 0.6, 0.2}}, {"Rs@1", {0.6, 0.3, 0.7}}};
  std::vector<PlotSeries> series;
  for (const auto& [name, rgb] : lines) {
    if (rows.front().median.count(name) == 0) continue;
    PlotSeries s{{}, rgb[0], rgb[1], rgb[2]};
    for (const SweepRow& r : rows) s.y.push_back(Percent(r.median.at(name)));
    series.push_back(std::move(s));
  }
  return EncodePng(RenderLogPlot(x, series));
}

nlohmann::ordered_json SweepResult::ToJson() const {
  ojson j;
  j["seeds"] = seeds;
  ojson rs = ojson::array();
  for (const SweepRow& r : rows) {
    ojson per_seed = ojson::array();
    for (const auto& m : r.per_seed) per_seed.push_back(m);
    rs.push_back({{"n_triplets", r.n_triplets}, {"median", r.median}, {"per_seed", per_seed}});
  }
  j["rows"] = rs;
  return j;
}

SweepResult RunScaleSweep(const RunConfig& cfg, CaptionBackend& caption, ReformulationBackend& reform) {
  cfg.Validate();
  SweepResult result;
  result.seeds = cfg.sweep.seeds;
  for (int64_t n : cfg.sweep.counts) result.rows.push_back({n, {}, {}});
  for (uint64_t seed : cfg.sweep.seeds) {
    RunConfig base = cfg;
    base.ApplySeed(seed);
    base.pairs.n_pairs = cfg.sweep.counts.back();
    const Benchmark bench = BuildBenchmark(base, caption, reform);
    for (SweepRow& row : result.rows) {
      const TripletDataset subset(bench.train.begin(), bench.train.begin() + row.n_triplets);
      const TrainedRun run = TrainAndEvaluate(base, bench.collection, subset, bench.eval_set);
      row.per_seed.push_back(run.report.mode("e_r").metrics);
      spdlog::info("sweep seed {} n={}: R@1 {}", seed, row.n_triplets, Pct(row.per_seed.back().at("R@1")));
    }
  }
  for (SweepRow& row : result.rows) row.median = MedianMetrics(row.per_seed);
  return result;
}

void GenerateDataCommand(const RunConfig& cfg) {
  cfg.Validate();
  const fs::path collection_path = cfg.paths.Resolve(cfg.paths.collection);
  const fs::path dataset_path = cfg.paths.Resolve(cfg.paths.dataset);
  const fs::path eval_path = cfg.paths.Resolve(cfg.paths.eval_set);
  for (const fs::path& p : {collection_path, dataset_path, eval_path}) EnsureParent(p);
  auto caption = MakeCaptionBackend(cfg);
  auto reform = MakeReformulationBackend(cfg);
  const Benchmark bench = BuildBenchmark(cfg, *caption, *reform);

  WriteCollection(collection_path, bench.collection);
  WriteManifest(collection_path, "generate-data", cfg, {}, {{"n_images", bench.collection.size()}});
  const ojson backends = {{"caption", caption->id()}, {"reformulation", reform->id()}};
  WriteDataset(dataset_path, bench.train, ojson::object());
  WriteManifest(dataset_path, "generate-data", cfg, {collection_path},
                {{"n_records", bench.train.size()}, {"backends", backends}});
  WriteDataset(eval_path, bench.eval_set, ojson::object());
  WriteManifest(eval_path, "generate-data", cfg, {collection_path, dataset_path},
                {{"n_records", bench.eval_set.size()}, {"backends", backends}});
  spdlog::info("generate-data: {} images, {} triplets, {} eval cases", bench.collection.size(), bench.train.size(),
               bench.eval_set.size());
}

void TrainCommand(const RunConfig& cfg) {
  cfg.Validate();
  const fs::path collection_path = cfg.paths.Resolve(cfg.paths.collection);
  const fs::path dataset_path = cfg.paths.Resolve(cfg.paths.dataset);
  const fs::path ckpt_path = cfg.paths.Resolve(cfg.paths.checkpoint);
  const fs::path metrics_path = cfg.paths.Resolve(cfg.paths.metrics);
  RequireInput(collection_path, "collection");
  RequireInput(dataset_path, "dataset");
  EnsureParent(ckpt_path);
  EnsureParent(metrics_path);
  const Collection collection = ReadCollection(collection_path);
  const TripletDataset dataset = ReadDataset(dataset_path);
  ValidateDataset(dataset, collection, static_cast<size_t>(cfg.backend.word_cap));
  const Tokenizer tokenizer = Tokenizer::ForSchema(cfg.world.schema);
  TrainLog log;
  const size_t log_every = std::max<size_t>(1, dataset.size() / static_cast<size_t>(cfg.train.batch_size));
  const Checkpoint ckpt = Train(dataset, collection, cfg.model, tokenizer, cfg.train, &log,
                                [&](int64_t step, double loss) {
                                  if (static_cast<size_t>(step) % log_every == 0) {
                                    spdlog::info("train step {} loss {:.4f}", step, loss);
                                  }
                                });
  SaveCheckpoint(ckpt, ckpt_path);
  log.Write(metrics_path);
  const ojson extra = {{"steps", ckpt.step},
                       {"final_epoch_loss", log.epoch_loss.empty() ? 0.0 : log.epoch_loss.back()}};
  WriteManifest(ckpt_path, "train", cfg, {collection_path, dataset_path}, extra);
  WriteManifest(metrics_path, "train", cfg, {collection_path, dataset_path}, extra);
  spdlog::info("train: {} steps, checkpoint {}", ckpt.step, ckpt_path.string());
}

void FinetuneCombinerCommand(const RunConfig& cfg) {
  cfg.Validate();
  const fs::path collection_path = cfg.paths.Resolve(cfg.paths.collection);
  const fs::path dataset_path = cfg.paths.Resolve(cfg.paths.dataset);
  const fs::path ckpt_path = cfg.paths.Resolve(cfg.paths.checkpoint);
  RequireInput(collection_path, "collection");
  RequireInput(dataset_path, "dataset");
  RequireInput(ckpt_path, "checkpoint");
  const Collection collection = ReadCollection(collection_path);
  const TripletDataset dataset = ReadDataset(dataset_path);
  Checkpoint ckpt = LoadCheckpoint(ckpt_path);
  const std::string input_hash = Sha256File(ckpt_path);
  const double before = ckpt.lambda;
  FinetuneCombiner(ckpt, dataset, collection, cfg.train);
  SaveCheckpoint(ckpt, ckpt_path);
  WriteManifest(ckpt_path, "finetune-combiner", cfg, {collection_path, dataset_path},
                {{"input_checkpoint_sha256", input_hash}, {"lambda_before", before}, {"lambda", ckpt.lambda}});
  spdlog::info("finetune-combiner: lambda {:.4f} -> {:.4f}", before, ckpt.lambda);
}

EvalReport EvaluateCommand(const RunConfig& cfg) {
  cfg.Validate();
  const fs::path collection_path = cfg.paths.Resolve(cfg.paths.collection);
  const fs::path eval_path = cfg.paths.Resolve(cfg.paths.eval_set);
  const fs::path ckpt_path = cfg.paths.Resolve(cfg.paths.checkpoint);
  const fs::path report_path = cfg.paths.Resolve(cfg.paths.report);
  RequireInput(collection_path, "collection");
  RequireInput(eval_path, "evaluation set");
  RequireInput(ckpt_path, "checkpoint");
  EnsureParent(report_path);
  const Collection collection = ReadCollection(collection_path);
  const Checkpoint ckpt = LoadCheckpoint(ckpt_path);
  EvalReport report = Evaluate(ckpt, collection, CasesFromDataset(ReadDataset(eval_path)), cfg.eval.protocol);
  report.config_hash = cfg.Hash();
  WriteReport(report_path, report);
  WriteManifest(report_path, "evaluate", cfg, {collection_path, eval_path, ckpt_path});
  for (const ModeReport& m : report.modes) {
    std::string line;
    for (const auto& [name, v] : m.metrics) line += " " + name + "=" + Pct(v);
    spdlog::info("evaluate {}:{}", m.mode, line);
  }
  return report;
}

void GalleryCommand(const RunConfig& cfg) {
  cfg.Validate();
  const fs::path collection_path = cfg.paths.Resolve(cfg.paths.collection);
  const fs::path report_path = cfg.paths.Resolve(cfg.paths.report);
  const fs::path gallery_path = cfg.paths.Resolve(cfg.paths.gallery);
  RequireInput(collection_path, "collection");
  RequireInput(report_path, "report");
  EnsureParent(gallery_path);
  ExportGallery(ReadReport(report_path), ReadCollection(collection_path), cfg.eval.gallery_mode,
                cfg.eval.gallery_top_k, gallery_path);
  WriteManifest(gallery_path, "gallery", cfg, {collection_path, report_path});
  spdlog::info("gallery: {}", gallery_path.string());
}

SweepResult ScaleSweepCommand(const RunConfig& cfg) {
  auto caption = MakeCaptionBackend(cfg);
  auto reform = MakeReformulationBackend(cfg);
  const SweepResult result = RunScaleSweep(cfg, *caption, *reform);
  const fs::path base = cfg.paths.Resolve(cfg.paths.sweep);
  EnsureParent(base);
  const fs::path csv = base.string() + ".csv", png = base.string() + ".png", json = base.string() + ".json";
  WriteFileAtomic(csv, result.Csv());
  WriteFileAtomic(png, result.PlotPng());
  WriteFileAtomic(json, result.ToJson().dump(2) + "\n");
  for (const fs::path& p : {csv, png, json}) WriteManifest(p, "scale-sweep", cfg, {});
  spdlog::info("scale-sweep:\n{}", result.Csv());
  return result;
}

AblationResult AblateCommand(const RunConfig& cfg) {
  auto caption = MakeCaptionBackend(cfg);
  auto reform = MakeReformulationBackend(cfg);
  const AblationResult result = RunAblation(cfg, *caption, *reform);
  const fs::path base = cfg.paths.Resolve(cfg.paths.ablation);
  EnsureParent(base);
  const fs::path md = base.string() + ".md", json = base.string() + ".json";
  WriteFileAtomic(md, result.Table());
  WriteFileAtomic(json, result.ToJson().dump(2) + "\n");
  for (const fs::path& p : {md, json}) WriteManifest(p, "ablate", cfg, {});
  spdlog::info("ablate:\n{}", result.Table());
  return result;
}

int RunCli(int argc, const char* const* argv) {
  CLI::App app{"Zero-shot composed image retrieval: data generation, training, evaluation and experiments"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<uint64_t> seed;
  std::string out;
  struct Command {
    const char* name;
    const char* help;
    std::function<void(const RunConfig&)> run;
  };
  const std::vector<Command> commands = {
      {"generate-data", "Render the synthetic world and build triplets and the evaluation set",
       GenerateDataCommand},
      {"train", "Train the reformulation network", TrainCommand},
      {"finetune-combiner", "Fit the late-fusion weight with a frozen backbone", FinetuneCombinerCommand},
      {"evaluate", "Score retrieval and write the report", [](const RunConfig& c) { EvaluateCommand(c); }},
      {"gallery", "Export the HTML gallery of ranked candidates", GalleryCommand},
      {"scale-sweep", "Train on nested triplet counts and plot recall", [](const RunConfig& c) { ScaleSweepCommand(c); }},
      {"ablate", "Compare the full model with its ablations", [](const RunConfig& c) { AblateCommand(c); }},
  };
  for (const Command& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", config_path, "YAML run configuration");
    sub->add_option("--seed", seed, "Seed for pair sampling, initialization and training");
    sub->add_option("--out", out, "Output directory for artifacts");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }
  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : LoadRunConfig(config_path);
    ApplyOverrides(cfg, EnvironmentOverrides());
    if (seed) cfg.ApplySeed(*seed);
    if (!out.empty()) cfg.paths.out = out;
    for (const Command& c : commands) {
      if (app.got_subcommand(c.name)) c.run(cfg);
    }
    return kExitOk;
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return e.is_config_error() ? kExitConfigError : kExitRuntimeError;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitRuntimeError;
  }
}

}  // namespace zscir
