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

#ifndef ZSCIR_PIPELINE_DATASET_HPP_
#define ZSCIR_PIPELINE_DATASET_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "zscir/pipeline/backends.hpp"
#include "zscir/pipeline/image_record.hpp"
#include "zscir/pipeline/pairs.hpp"
#include "zscir/pipeline/schema.hpp"

namespace zscir {

inline constexpr int kDatasetSchemaVersion = 1;

struct Triplet {
  std::string ref_id;
  std::string target_id;
  std::string reformulation;
  std::string caption_ref;
  std::string caption_target;
  std::pair<std::string, std::string> backend_ids;  // (caption, reformulation)
  int64_t pair_index = 0;
  // Candidate ids for subset recall; only present in evaluation sets.
  std::optional<std::vector<std::string>> subset;

  bool operator==(const Triplet&) const = default;
};

using TripletDataset = std::vector<Triplet>;

struct BuildOptions {
  size_t word_cap = kDefaultWordCap;
  // Concurrent backend calls. Output order is pair_index regardless.
  int workers = 1;
};

// Captions every image that appears in `pairs` and reformulates each pair.
// One triplet per pair, in pair order.
TripletDataset BuildTriplets(const Collection& collection, const std::vector<ImagePair>& pairs,
                             CaptionBackend& caption_backend, ReformulationBackend& reform_backend,
                             const BuildOptions& options = {});

TripletDataset BuildDataset(const Collection& collection, const PairSamplingConfig& sampling,
                            CaptionBackend& caption_backend, ReformulationBackend& reform_backend,
                            const BuildOptions& options = {});

// Serialized dataset: one JSON object per line, keys in the order ref_id,
// target_id, reformulation, caption_ref, caption_target, backend_ids,
// pair_index[, subset].
std::string SerializeDataset(const TripletDataset& dataset);
TripletDataset ParseDataset(const std::string& text);

// Writes the dataset plus `<path>.manifest.json` holding the schema version,
// the supplied run metadata and the SHA-256 of the dataset bytes.
void WriteDataset(const std::filesystem::path& path, const TripletDataset& dataset,
                  const nlohmann::ordered_json& metadata);
TripletDataset ReadDataset(const std::filesystem::path& path);

std::filesystem::path ManifestPath(const std::filesystem::path& artifact);

// Checks that every triplet references images of the collection and obeys
// the word cap.
void ValidateDataset(const TripletDataset& dataset, const Collection& collection,
                     size_t word_cap = kDefaultWordCap);

struct EvalSetOptions {
  int64_t n_cases = 300;
  uint64_t seed = 1;
  int subset_negatives = 5;
  BuildOptions build;
};

// Evaluation cases: reference from the query split, target from the index
// split, same meta class, excluding ordered pairs in `exclude`. Each case
// carries a subset of the ground truth plus the `subset_negatives` index
// images closest to it in attribute distance (ties by id).
TripletDataset BuildEvalSet(const Collection& collection, const TripletDataset& exclude,
                            CaptionBackend& caption_backend, ReformulationBackend& reform_backend,
                            const EvalSetOptions& options);

}  // namespace zscir

#endif  // ZSCIR_PIPELINE_DATASET_HPP_
