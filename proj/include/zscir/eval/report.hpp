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


#ifndef ZSCIR_EVAL_REPORT_HPP_
#define ZSCIR_EVAL_REPORT_HPP_

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "zscir/eval/retrieval.hpp"

namespace zscir {

// A named mean of metrics, e.g. {"mean_r10_r50", {"R@10", "R@50"}}. Metric names
// are "R@K" and "Rs@K" (subset recall).
struct NamedAverage {
  std::string name;
  std::vector<std::string> metrics;
};

enum class IndexSplit { kIndex, kAll };

struct EvalProtocol {
  std::vector<int> ks = {1, 5, 10, 50};
  std::vector<int> subset_ks = {1, 2, 3};
  std::vector<NamedAverage> averages = {{"mean_r10_r50", {"R@10", "R@50"}}, {"mean_r5_rs1", {"R@5", "Rs@1"}}};
  std::vector<QueryMode> modes = {QueryMode::kQuery, QueryMode::kFused, QueryMode::kImageOnly, QueryMode::kTextOnly,
                                  QueryMode::kSum};
  IndexSplit index_split = IndexSplit::kIndex;
  IndexMode index_mode = IndexMode::kModelTarget;
  // Keep the reference image among its own candidates.
  bool include_reference = false;
  // Length of the stored ranked lists; 0 stores none.
  int keep_ranked = 10;

  void Validate() const;
};

void to_json(nlohmann::json& j, const EvalProtocol& p);

struct ModeReport {
  std::string mode;
  std::map<std::string, double> metrics;  // "R@K" / "Rs@K" -> fraction
  std::vector<std::pair<std::string, double>> averages;
  // Per meta class of the ground truth, then the uniform mean over classes.
  std::map<std::string, std::map<std::string, double>> per_class;
  std::map<std::string, double> class_mean;
  std::vector<Ranking> ranked;

  // Equality of every result field, ignoring the mode name.
  bool SameResults(const ModeReport& other) const;
};

struct EvalReport {
  std::string config_hash;
  std::string checkpoint_hash;
  double lambda = 0.0;
  std::vector<QueryCase> cases;
  std::vector<ModeReport> modes;

  const ModeReport& mode(std::string_view name) const;
  nlohmann::ordered_json ToJson() const;
};

// Fractions as percentages rounded to two decimals.
double Percent(double fraction);

// Runs every configured query mode over `cases` against the chosen split of
// `collection`. The fused mode uses the checkpoint's lambda.
EvalReport Evaluate(const Checkpoint& ckpt, const Collection& collection, const std::vector<QueryCase>& cases,
                    const EvalProtocol& protocol);

// Metrics of one mode given precomputed query rows.
ModeReport ScoreMode(std::string name, const Mat& queries, const std::vector<QueryCase>& cases,
                     const Collection& collection, const EmbeddingIndex& index, const EvalProtocol& protocol);

void WriteReport(const std::filesystem::path& path, const EvalReport& report);

// Inverse of ToJson for the fields it stores. Subsets are not stored; cases
// come from the ranked lists.
EvalReport ParseReport(const nlohmann::ordered_json& j);
EvalReport ReadReport(const std::filesystem::path& path);

// Self-contained HTML grid: one row per case with the reference image, the
// reformulation and the top-k candidates; the ground truth is outlined, and
// cases that miss it carry a "gt not retrieved" marker. Throws
// MissingRankedLists when the mode has no stored rankings.
std::string RenderGallery(const EvalReport& report, const Collection& collection, std::string_view mode,
                          int top_k);
void ExportGallery(const EvalReport& report, const Collection& collection, std::string_view mode, int top_k,
                   const std::filesystem::path& path);

}  // namespace zscir

#endif  // ZSCIR_EVAL_REPORT_HPP_
