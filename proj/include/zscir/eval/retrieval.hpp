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


#ifndef ZSCIR_EVAL_RETRIEVAL_HPP_
#define ZSCIR_EVAL_RETRIEVAL_HPP_

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "zscir/model/checkpoint.hpp"
#include "zscir/model/embed.hpp"
#include "zscir/pipeline/dataset.hpp"
#include "zscir/pipeline/image_record.hpp"

namespace zscir {

struct ScoredId {
  std::string id;
  double score = 0.0;

  bool operator==(const ScoredId&) const = default;
};

using Ranking = std::vector<ScoredId>;

// Immutable gallery of embeddings. Row i belongs to ids()[i]; rows are
// non-zero and ids unique.
class EmbeddingIndex {
 public:
  EmbeddingIndex() = default;
  EmbeddingIndex(std::vector<std::string> ids, Mat matrix);

  const std::vector<std::string>& ids() const { return ids_; }
  const Mat& matrix() const { return matrix_; }
  const Eigen::VectorXd& norms() const { return norms_; }
  size_t size() const { return ids_.size(); }
  Eigen::Index dim() const { return matrix_.cols(); }
  std::optional<size_t> row_of(const std::string& id) const;

 private:
  std::vector<std::string> ids_;
  Mat matrix_;
  Eigen::VectorXd norms_;
  std::unordered_map<std::string, size_t> by_id_;
};

enum class IndexMode { kModelTarget, kImageOnlyBaseline };

std::string_view IndexModeName(IndexMode mode);
IndexMode ParseIndexMode(std::string_view name);

// One row per image through the null-text path on the online weights. Both
// modes embed identically: the image-only baseline is the target path.
EmbeddingIndex BuildIndex(const std::vector<const ImageRecord*>& images, const Checkpoint& ckpt,
                          IndexMode mode = IndexMode::kModelTarget);

// Top-min(k, N) rows by cosine similarity, descending, ties by ascending id.
// `exclude` removes one id from the candidates.
Ranking Retrieve(const Vec& query, const EmbeddingIndex& index, size_t k,
                 const std::optional<std::string>& exclude = std::nullopt);

// Ranks only the listed candidates, all of which must be in the index.
Ranking RetrieveAmong(const Vec& query, const EmbeddingIndex& index, const std::vector<std::string>& candidates,
                      size_t k);

struct QueryCase {
  std::string ref_id;
  std::string reformulation;
  std::string gt_target_id;
  std::optional<std::vector<std::string>> subset;

  bool operator==(const QueryCase&) const = default;
};

std::vector<QueryCase> CasesFromDataset(const TripletDataset& dataset);

// Fraction of cases whose ground truth is among the first k entries of its
// ranking. Throws MissingRanking unless there is one ranking per case.
double RecallAtK(const std::vector<QueryCase>& cases, const std::vector<Ranking>& rankings, size_t k);

// Recall within each case's subset, ranked by cosine to the case's query row.
// Throws GtNotInSubset when a case lacks a subset or its subset lacks the
// ground truth.
double RecallSubsetAtK(const std::vector<QueryCase>& cases, const Mat& queries, const EmbeddingIndex& index,
                       size_t k);

enum class QueryMode { kQuery, kFused, kImageOnly, kTextOnly, kSum };

std::string_view QueryModeName(QueryMode mode);
QueryMode ParseQueryMode(std::string_view name);

enum class BaselineMode { kImageOnly, kTextOnly, kSum };

// Single-modality baselines: the reference image's target embedding, the
// pooled reformulation text, or the sum of both after L2 normalization.
Vec BaselineEmbed(const QueryCase& query_case, const Collection& collection, const Checkpoint& ckpt,
                  BaselineMode mode);

// Query rows for every case under `mode`, in case order.
Mat QueryEmbeddings(const std::vector<QueryCase>& cases, const Collection& collection, const Checkpoint& ckpt,
                    QueryMode mode);

}  // namespace zscir

#endif  // ZSCIR_EVAL_RETRIEVAL_HPP_
