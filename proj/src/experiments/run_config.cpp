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


#include "zscir/experiments/run_config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cctype>
#include <functional>

#include "zscir/common/error.hpp"
#include "zscir/common/io.hpp"
#include "zscir/model/tokenizer.hpp"

extern char** environ;

namespace zscir {

namespace {

using ojson = nlohmann::ordered_json;

// Attribute schema pieces, assembled after every key has been read.
struct SchemaParts {
  std::vector<Attribute> attributes;
  std::string object_attribute;
  std::string absent_value;
  bool changed = false;
};

struct Field {
  std::string key;
  std::function<void(const YAML::Node&)> set;
  std::function<ojson()> get;
};

struct Section {
  std::string name;
  std::vector<Field> fields;
};

template <class T>
T As(const YAML::Node& node, const std::string& key) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception& e) {
    Fail(ErrorCode::kInvalidConfig, "bad value for " + key + ": " + e.what());
  }
}

template <class T>
Field Bind(const std::string& key, T* target) {
  return {key, [target, key](const YAML::Node& n) { *target = As<T>(n, key); }, [target] { return ojson(*target); }};
}

template <class T>
Field BindParsed(const std::string& key, T* target, T (*parse)(std::string_view),
                 std::string_view (*name)(T)) {
  return {key, [=](const YAML::Node& n) { *target = parse(As<std::string>(n, key)); },
          [=] { return ojson(std::string(name(*target))); }};
}

TemperatureMode ParseTemperature(std::string_view s) {
  if (s == "fixed") return TemperatureMode::kFixed;
  if (s == "learnable") return TemperatureMode::kLearnable;
  Fail(ErrorCode::kInvalidConfig, "temperature must be fixed or learnable, got " + std::string(s));
}

std::string_view TemperatureName(TemperatureMode m) { return m == TemperatureMode::kFixed ? "fixed" : "learnable"; }

IndexSplit ParseIndexSplit(std::string_view s) {
  if (s == "index") return IndexSplit::kIndex;
  if (s == "all") return IndexSplit::kAll;
  Fail(ErrorCode::kInvalidConfig, "index_split must be index or all, got " + std::string(s));
}

std::string_view IndexSplitName(IndexSplit s) { return s == IndexSplit::kIndex ? "index" : "all"; }

std::vector<Section> Sections(RunConfig& c, SchemaParts& schema) {
  std::vector<Section> out;
  PathsConfig& p = c.paths;
  out.push_back({"paths",
                 {Bind("out", &p.out), Bind("collection", &p.collection), Bind("dataset", &p.dataset),
                  Bind("eval_set", &p.eval_set), Bind("checkpoint", &p.checkpoint), Bind("metrics", &p.metrics),
                  Bind("report", &p.report), Bind("gallery", &p.gallery), Bind("sweep", &p.sweep),
                  Bind("ablation", &p.ablation)}});

  SyntheticWorldConfig& w = c.world;
  Field attributes{"schema",
                   [&schema](const YAML::Node& n) {
                     Require(n.IsSequence(), ErrorCode::kInvalidConfig, "world.schema must be a list");
                     schema.attributes.clear();
                     for (const YAML::Node& a : n) {
                       Require(a.IsMap(), ErrorCode::kInvalidConfig, "world.schema entries need name and values");
                       for (const auto& kv : a) {
                         const std::string k = kv.first.as<std::string>();
                         Require(k == "name" || k == "values", ErrorCode::kInvalidConfig,
                                 "unknown key world.schema." + k);
                       }
                       Require(a["name"].IsDefined() && a["values"].IsDefined(), ErrorCode::kInvalidConfig,
                               "world.schema entries need name and values");
                       schema.attributes.push_back({As<std::string>(a["name"], "world.schema.name"),
                                                    As<std::vector<std::string>>(a["values"], "world.schema.values")});
                     }
                     schema.changed = true;
                   },
                   [&w] {
                     ojson attrs = ojson::array();
                     for (const Attribute& a : w.schema.attributes()) {
                       attrs.push_back({{"name", a.name}, {"values", a.values}});
                     }
                     return attrs;
                   }};
  Field object_attribute{"object_attribute",
                         [&schema](const YAML::Node& n) {
                           schema.object_attribute = As<std::string>(n, "world.object_attribute");
                           schema.changed = true;
                         },
                         [&w] { return ojson(w.schema.object_attribute()); }};
  Field absent_value{"absent_value",
                     [&schema](const YAML::Node& n) {
                       schema.absent_value = As<std::string>(n, "world.absent_value");
                       schema.changed = true;
                     },
                     [&w] { return ojson(w.schema.absent_value()); }};
  out.push_back({"world",
                 {attributes, object_attribute, absent_value, Bind("image_size", &w.image_size), Bind("seed", &w.seed),
                  Bind("n_images", &w.n_images), Bind("max_tuples", &w.max_tuples),
                  Bind("query_fraction", &w.query_fraction)}});

  PairSamplingConfig& pr = c.pairs;
  out.push_back({"pairs",
                 {BindParsed("strategy", &pr.strategy, &ParsePairStrategy, &PairStrategyName),
                  Bind("n_pairs", &pr.n_pairs), Bind("seed", &pr.seed), Bind("dedupe", &pr.dedupe)}});

  ModelConfig& m = c.model;
  out.push_back({"model",
                 {Bind("image_size", &m.image_size), Bind("channels", &m.channels), Bind("patch_size", &m.patch_size),
                  Bind("d_model", &m.d_model), Bind("n_heads", &m.n_heads), Bind("n_blocks", &m.n_blocks),
                  Bind("mlp_ratio", &m.mlp_ratio), Bind("max_text_len", &m.max_text_len),
                  Bind("text_layers", &m.text_layers), Bind("temperature_init", &m.temperature_init),
                  Bind("lambda_init", &m.lambda_init), Bind("seed", &m.seed)}});

  TrainConfig& t = c.train;
  Field preset{"preset",
               [&t](const YAML::Node& n) {
                 const std::string name = As<std::string>(n, "train.preset");
                 if (name == "pretrained") {
                   const TrainConfig pretrained = TrainConfig::PretrainedPreset();
                   t.learning_rate = pretrained.learning_rate;
                   t.weight_decay = pretrained.weight_decay;
                   t.batch_size = pretrained.batch_size;
                 } else {
                   Require(name == "desk", ErrorCode::kInvalidConfig, "train.preset must be desk or pretrained");
                 }
               },
               nullptr};
  out.push_back({"train",
                 {preset, Bind("batch_size", &t.batch_size), Bind("epochs", &t.epochs),
                  Bind("learning_rate", &t.learning_rate), Bind("weight_decay", &t.weight_decay),
                  Bind("ema_momentum", &t.ema_momentum),
                  BindParsed("temperature", &t.temperature, &ParseTemperature, &TemperatureName),
                  Bind("seed", &t.seed), Bind("shuffle", &t.shuffle), Bind("no_ema", &t.no_ema),
                  Bind("no_cross_attention", &t.no_cross_attention), Bind("grad_clip", &t.grad_clip),
                  Bind("combiner_epochs", &t.combiner_epochs),
                  Bind("combiner_learning_rate", &t.combiner_learning_rate)}});

  EvalConfig& e = c.eval;
  EvalProtocol& ep = e.protocol;
  Field averages{"averages",
                 [&ep](const YAML::Node& n) {
                   Require(n.IsMap(), ErrorCode::kInvalidConfig, "eval.averages must map names to metric lists");
                   ep.averages.clear();
                   for (const auto& kv : n) {
                     ep.averages.push_back({kv.first.as<std::string>(),
                                            As<std::vector<std::string>>(kv.second, "eval.averages")});
                   }
                 },
                 [&ep] {
                   ojson j = ojson::object();
                   for (const NamedAverage& a : ep.averages) j[a.name] = a.metrics;
                   return j;
                 }};
  Field modes{"modes",
              [&ep](const YAML::Node& n) {
                ep.modes.clear();
                for (const std::string& s : As<std::vector<std::string>>(n, "eval.modes")) {
                  ep.modes.push_back(ParseQueryMode(s));
                }
              },
              [&ep] {
                ojson j = ojson::array();
                for (QueryMode q : ep.modes) j.push_back(std::string(QueryModeName(q)));
                return j;
              }};
  out.push_back({"eval",
                 {Bind("n_cases", &e.set.n_cases), Bind("seed", &e.set.seed),
                  Bind("subset_negatives", &e.set.subset_negatives), Bind("ks", &ep.ks),
                  Bind("subset_ks", &ep.subset_ks), averages, modes,
                  BindParsed("index_split", &ep.index_split, &ParseIndexSplit, &IndexSplitName),
                  BindParsed("index_mode", &ep.index_mode, &ParseIndexMode, &IndexModeName),
                  Bind("include_reference", &ep.include_reference), Bind("keep_ranked", &ep.keep_ranked),
                  Bind("gallery_top_k", &e.gallery_top_k), Bind("gallery_mode", &e.gallery_mode)}});

  BackendSelection& b = c.backend;
  out.push_back({"backend",
                 {Bind("caption", &b.caption), Bind("reformulation", &b.reformulation), Bind("endpoint", &b.endpoint),
                  Bind("caption_model", &b.caption_model), Bind("reformulation_model", &b.reformulation_model),
                  Bind("timeout_seconds", &b.timeout_seconds), Bind("max_retries", &b.max_retries),
                  Bind("word_cap", &b.word_cap), Bind("workers", &b.workers)}});

  out.push_back({"sweep", {Bind("counts", &c.sweep.counts), Bind("seeds", &c.sweep.seeds)}});
  out.push_back({"ablate", {Bind("seeds", &c.ablate.seeds), Bind("n_pairs", &c.ablate.n_pairs)}});
  return out;
}

const Field& FindField(const std::vector<Section>& sections, const std::string& section, const std::string& key) {
  for (const Section& s : sections) {
    if (s.name != section) continue;
    for (const Field& f : s.fields) {
      if (f.key == key) return f;
    }
    Fail(ErrorCode::kInvalidConfig, "unknown key " + section + "." + key);
  }
  Fail(ErrorCode::kInvalidConfig, "unknown section " + section);
}

SchemaParts PartsOf(const AttributeSchema& schema) {
  return {schema.attributes(), schema.object_attribute(), schema.absent_value(), false};
}

void Rebuild(RunConfig& cfg, const SchemaParts& parts) {
  if (!parts.changed) return;
  try {
    cfg.world.schema = AttributeSchema(parts.attributes, parts.object_attribute, parts.absent_value);
  } catch (const Error& e) {
    Fail(ErrorCode::kInvalidConfig, std::string("world schema: ") + e.what());
  }
}

std::string Lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
  return s;
}

}  // namespace

std::filesystem::path PathsConfig::Resolve(const std::string& path) const {
  const std::filesystem::path p(path);
  return p.is_absolute() ? p : std::filesystem::path(out) / p;
}

void RunConfig::ApplySeed(uint64_t seed) {
  pairs.seed = seed;
  model.seed = seed;
  train.seed = seed;
}

void RunConfig::Validate() const {
  auto check = [](bool ok, const std::string& what) { Require(ok, ErrorCode::kInvalidConfig, what); };
  ModelConfig m = model;
  m.text_vocab_size = Tokenizer::ForSchema(world.schema).vocab_size();
  m.Validate();
  train.Validate();
  check(world.image_size == model.image_size, "world.image_size must equal model.image_size");
  check(model.channels == 3, "the synthetic world renders 3 channels");
  check(world.query_fraction > 0.0 && world.query_fraction < 1.0, "world.query_fraction must lie in (0, 1)");
  check(world.n_images >= 0, "world.n_images must be >= 0");
  check(pairs.n_pairs > 0, "pairs.n_pairs must be positive");
  check(eval.set.n_cases > 0, "eval.n_cases must be positive");
  check(eval.set.subset_negatives >= 1, "eval.subset_negatives must be >= 1");
  eval.protocol.Validate();
  check(eval.gallery_top_k >= 1, "eval.gallery_top_k must be >= 1");
  const QueryMode gallery_mode = ParseQueryMode(eval.gallery_mode);
  check(std::find(eval.protocol.modes.begin(), eval.protocol.modes.end(), gallery_mode) != eval.protocol.modes.end(),
        "eval.gallery_mode must be one of eval.modes");
  check(eval.protocol.keep_ranked >= eval.gallery_top_k, "eval.keep_ranked must cover eval.gallery_top_k");
  for (const std::string* kind : {&backend.caption, &backend.reformulation}) {
    check(*kind == "oracle" || *kind == "http", "backends must be oracle or http, got " + *kind);
  }
  if (backend.caption == "http" || backend.reformulation == "http") {
    check(!backend.endpoint.empty(), "backend.endpoint is required for http backends");
  }
  if (backend.caption == "http") check(!backend.caption_model.empty(), "backend.caption_model is required");
  if (backend.reformulation == "http") {
    check(!backend.reformulation_model.empty(), "backend.reformulation_model is required");
  }
  check(backend.word_cap >= 1 && backend.workers >= 1 && backend.max_retries >= 0 && backend.timeout_seconds > 0,
        "backend limits must be positive");
  check(!sweep.counts.empty() && !sweep.seeds.empty(), "sweep needs counts and seeds");
  for (size_t i = 0; i < sweep.counts.size(); ++i) {
    check(sweep.counts[i] > 0, "sweep counts must be positive");
    check(i == 0 || sweep.counts[i] > sweep.counts[i - 1], "sweep counts must be strictly increasing");
  }
  check(!ablate.seeds.empty(), "ablate needs at least one seed");
  check(ablate.n_pairs >= 0, "ablate.n_pairs must be >= 0");
}

nlohmann::ordered_json RunConfig::ToJson() const {
  RunConfig copy = *this;
  SchemaParts parts = PartsOf(copy.world.schema);
  ojson j = ojson::object();
  for (const Section& s : Sections(copy, parts)) {
    if (s.name == "paths") continue;
    ojson section = ojson::object();
    for (const Field& f : s.fields) {
      if (f.get) section[f.key] = f.get();
    }
    j[s.name] = section;
  }
  return j;
}

std::string RunConfig::Hash() const { return Sha256Hex(ToJson().dump()); }

RunConfig ParseRunConfig(const std::string& yaml) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml);
  } catch (const YAML::Exception& e) {
    Fail(ErrorCode::kInvalidConfig, std::string("config is not valid YAML: ") + e.what());
  }
  RunConfig cfg;
  if (root.IsNull()) return cfg;
  Require(root.IsMap(), ErrorCode::kInvalidConfig, "config must be a mapping of sections");
  SchemaParts parts = PartsOf(cfg.world.schema);
  const std::vector<Section> sections = Sections(cfg, parts);
  for (const auto& kv : root) {
    const std::string name = kv.first.as<std::string>();
    const YAML::Node& body = kv.second;
    Require(std::any_of(sections.begin(), sections.end(), [&](const Section& s) { return s.name == name; }),
            ErrorCode::kInvalidConfig, "unknown section " + name);
    if (body.IsNull()) continue;
    Require(body.IsMap(), ErrorCode::kInvalidConfig, "section " + name + " must be a mapping");
    // The preset goes first so explicit keys override it.
    if (body["preset"].IsDefined() && name == "train") FindField(sections, name, "preset").set(body["preset"]);
    for (const auto& field : body) {
      const std::string key = field.first.as<std::string>();
      if (name == "train" && key == "preset") continue;
      FindField(sections, name, key).set(field.second);
    }
  }
  Rebuild(cfg, parts);
  return cfg;
}

RunConfig LoadRunConfig(const std::filesystem::path& path) {
  Require(std::filesystem::exists(path), ErrorCode::kInvalidConfig, "config file not found: " + path.string());
  return ParseRunConfig(ReadFile(path));
}

void ApplyOverrides(RunConfig& cfg, const std::map<std::string, std::string>& env, const std::string& prefix) {
  SchemaParts parts = PartsOf(cfg.world.schema);
  const std::vector<Section> sections = Sections(cfg, parts);
  for (const auto& [name, value] : env) {
    if (name.rfind(prefix, 0) != 0) continue;
    const std::string rest = Lower(name.substr(prefix.size()));
    const size_t cut = rest.find('_');
    Require(cut != std::string::npos && cut > 0 && cut + 1 < rest.size(), ErrorCode::kInvalidConfig,
            "override " + name + " must look like " + prefix + "<SECTION>_<KEY>");
    YAML::Node node;
    try {
      node = YAML::Load(value);
    } catch (const YAML::Exception& e) {
      Fail(ErrorCode::kInvalidConfig, "override " + name + " is not a YAML value: " + e.what());
    }
    FindField(sections, rest.substr(0, cut), rest.substr(cut + 1)).set(node);
  }
  Rebuild(cfg, parts);
}

std::map<std::string, std::string> EnvironmentOverrides(const std::string& prefix) {
  std::map<std::string, std::string> out;
  for (char** e = environ; e && *e; ++e) {
    const std::string entry(*e);
    const size_t eq = entry.find('=');
    if (eq == std::string::npos || entry.rfind(prefix, 0) != 0) continue;
    out[entry.substr(0, eq)] = entry.substr(eq + 1);
  }
  return out;
}

}  // namespace zscir
