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

#include "zscir/pipeline/dataset.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "zscir/common/error.hpp"
#include "zscir/common/io.hpp"
#include "zscir/common/parallel.hpp"
#include "zscir/common/random.hpp"

namespace zscir {

using nlohmann::ordered_json;

TripletDataset BuildTriplets(const Collection& collection, const std::vector<ImagePair>& pairs,
                             CaptionBackend& caption_backend, ReformulationBackend& reform_backend,
                             const BuildOptions& options) {
  // Caption each distinct image once, in first-appearance order.
  std::vector<std::string> to_caption;
  std::map<std::string, size_t> caption_slot;
  for (const auto& [a, b] : pairs) {
    for (const std::string* id : {&a, &b}) {
      collection.at(*id);  // DanglingId on unknown ids
      if (caption_slot.emplace(*id, to_caption.size()).second) to_caption.push_back(*id);
    }
  }
  std::vector<CaptionRecord> captions(to_caption.size());
  ParallelFor(to_caption.size(), options.workers,
              [&](size_t i) { captions[i] = Caption(collection.at(to_caption[i]), caption_backend); });

  TripletDataset dataset(pairs.size());
  ParallelFor(pairs.size(), options.workers, [&](size_t i) {
    const auto& [a, b] = pairs[i];
    Require(a != b, ErrorCode::kInvalidConfig, "pair references the same image twice: " + a);
    Triplet& t = dataset[i];
    t.ref_id = a;
    t.target_id = b;
    t.caption_ref = captions[caption_slot.at(a)].text;
    t.caption_target = captions[caption_slot.at(b)].text;
    t.reformulation = Reformulate(t.caption_ref, t.caption_target, reform_backend, options.word_cap);
    t.backend_ids = {caption_backend.id(), reform_backend.id()};
    t.pair_index = static_cast<int64_t>(i);
  });
  return dataset;
}

TripletDataset BuildDataset(const Collection& collection, const PairSamplingConfig& sampling,
                            CaptionBackend& caption_backend, ReformulationBackend& reform_backend,
                            const BuildOptions& options) {
  return BuildTriplets(collection, SamplePairs(collection, sampling), caption_backend, reform_backend,
                       options);
}

std::string SerializeDataset(const TripletDataset& dataset) {
  std::string out;
  for (const Triplet& t : dataset) {
    ordered_json j;
    j["ref_id"] = t.ref_id;
    j["target_id"] = t.target_id;
    j["reformulation"] = t.reformulation;
    j["caption_ref"] = t.caption_ref;
    j["caption_target"] = t.caption_target;
    j["backend_ids"] = {t.backend_ids.first, t.backend_ids.second};
    j["pair_index"] = t.pair_index;
    if (t.subset) j["subset"] = *t.subset;
    out += j.dump();
    out += '\n';
  }
  return out;
}

TripletDataset ParseDataset(const std::string& text) {
  TripletDataset dataset;
  std::istringstream in(text);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = ordered_json::parse(line);
      Triplet t;
      t.ref_id = j.at("ref_id").get<std::string>();
      t.target_id = j.at("target_id").get<std::string>();
      t.reformulation = j.at("reformulation").get<std::string>();
      t.caption_ref = j.at("caption_ref").get<std::string>();
      t.caption_target = j.at("caption_target").get<std::string>();
      const auto ids = j.at("backend_ids").get<std::vector<std::string>>();
      Require(ids.size() == 2, ErrorCode::kParse, "backend_ids must have two entries");
      t.backend_ids = {ids[0], ids[1]};
      t.pair_index = j.at("pair_index").get<int64_t>();
      if (j.contains("subset")) t.subset = j.at("subset").get<std::vector<std::string>>();
      dataset.push_back(std::move(t));
    } catch (const nlohmann::json::exception& e) {
      Fail(ErrorCode::kParse, "dataset line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return dataset;
}

std::filesystem::path ManifestPath(const std::filesystem::path& artifact) {
  std::filesystem::path p = artifact;
  p += ".manifest.json";
  return p;
}

void WriteDataset(const std::filesystem::path& path, const TripletDataset& dataset,
                  const ordered_json& metadata) {
  const std::string bytes = SerializeDataset(dataset);
  ordered_json manifest;
  manifest["schema_version"] = kDatasetSchemaVersion;
  manifest["n_records"] = dataset.size();
  manifest["content_sha256"] = Sha256Hex(bytes);
  manifest["metadata"] = metadata;
  WriteFileAtomic(path, bytes);
  WriteFileAtomic(ManifestPath(path), manifest.dump(2) + "\n");
}

TripletDataset ReadDataset(const std::filesystem::path& path) { return ParseDataset(ReadFile(path)); }

void ValidateDataset(const TripletDataset& dataset, const Collection& collection, size_t word_cap) {
  for (const Triplet& t : dataset) {
    Require(collection.contains(t.ref_id), ErrorCode::kDanglingId, "unknown reference id " + t.ref_id);
    Require(collection.contains(t.target_id), ErrorCode::kDanglingId, "unknown target id " + t.target_id);
    Require(t.ref_id != t.target_id, ErrorCode::kInvalidConfig, "triplet with identical images " + t.ref_id);
    const size_t words = WordCount(t.reformulation);
    Require(words > 0, ErrorCode::kEmptyReformulation, "empty reformulation at pair " +
                                                           std::to_string(t.pair_index));
    Require(words <= word_cap, ErrorCode::kInvalidConfig,
            "reformulation over the word cap at pair " + std::to_string(t.pair_index));
    if (t.subset) {
      for (const auto& id : *t.subset)
        Require(collection.contains(id), ErrorCode::kDanglingId, "unknown subset id " + id);
    }
  }
}

TripletDataset BuildEvalSet(const Collection& collection, const TripletDataset& exclude,
                            CaptionBackend& caption_backend, ReformulationBackend& reform_backend,
                            const EvalSetOptions& options) {
  Require(options.n_cases > 0, ErrorCode::kInvalidConfig, "eval set needs n_cases > 0");
  std::set<std::pair<std::string, std::string>> excluded;
  for (const Triplet& t : exclude) excluded.emplace(t.ref_id, t.target_id);

  const auto queries = collection.WithSplit(Split::kQuery);
  const auto index = collection.WithSplit(Split::kIndex);
  std::vector<ImagePair> candidates;
  for (const ImageRecord* q : queries) {
    for (const ImageRecord* g : index) {
      if (q->id == g->id || q->meta_class != g->meta_class) continue;
      if (excluded.count({q->id, g->id})) continue;
      candidates.emplace_back(q->id, g->id);
    }
  }
  Require(candidates.size() >= static_cast<size_t>(options.n_cases), ErrorCode::kInsufficientPairs,
          "only " + std::to_string(candidates.size()) + " evaluation pairs are available");
  Rng rng(options.seed);
  for (size_t i = 0; i < static_cast<size_t>(options.n_cases); ++i) {
    const size_t j = i + rng.Below(candidates.size() - i);
    std::swap(candidates[i], candidates[j]);
  }
  candidates.resize(options.n_cases);

  TripletDataset cases = BuildTriplets(collection, candidates, caption_backend, reform_backend, options.build);
  for (Triplet& c : cases) {
    const ImageRecord& gt = collection.at(c.target_id);
    if (!gt.attributes) continue;
    std::vector<std::pair<int, std::string>> ranked;
    for (const ImageRecord* g : index) {
      if (g->id == c.target_id || g->id == c.ref_id || !g->attributes) continue;
      ranked.emplace_back(AttributeDistance(*gt.attributes, *g->attributes), g->id);
    }
    std::sort(ranked.begin(), ranked.end());
    std::vector<std::string> subset{c.target_id};
    for (size_t i = 0; i < ranked.size() && static_cast<int>(i) < options.subset_negatives; ++i)
      subset.push_back(ranked[i].second);
    if (subset.size() >= 2) c.subset = std::move(subset);
  }
  return cases;
}

}  // namespace zscir
