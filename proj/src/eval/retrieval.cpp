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


#include "zscir/eval/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "zscir/common/error.hpp"
#include "zscir/train/trainer.hpp"

namespace zscir {

namespace {

bool Before(const ScoredId& a, const ScoredId& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.id < b.id;
}

Ranking TopK(std::vector<ScoredId> scored, size_t k) {
  const size_t n = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(), Before);
  scored.resize(n);
  return scored;
}

double QueryNorm(const Vec& query, const EmbeddingIndex& index) {
  Require(query.size() == index.dim(), ErrorCode::kDimensionMismatch, "query width differs from the index");
  const double norm = query.norm();
  Require(norm > 0.0 && std::isfinite(norm), ErrorCode::kZeroVector, "query embedding has zero norm");
  return norm;
}

double Cosine(const Vec& query, double query_norm, const EmbeddingIndex& index, size_t row) {
  const double c = query.dot(index.matrix().row(static_cast<Eigen::Index>(row))) / (query_norm * index.norms()(row));
  return std::clamp(c, -1.0, 1.0);
}

}  // namespace

EmbeddingIndex::EmbeddingIndex(std::vector<std::string> ids, Mat matrix)
    : ids_(std::move(ids)), matrix_(std::move(matrix)) {
  Require(static_cast<Eigen::Index>(ids_.size()) == matrix_.rows(), ErrorCode::kShapeMismatch,
          "index ids and rows differ in count");
  norms_ = matrix_.rowwise().norm().transpose();
  for (size_t i = 0; i < ids_.size(); ++i) {
    Require(by_id_.emplace(ids_[i], i).second, ErrorCode::kDuplicateId, "duplicate index id " + ids_[i]);
    Require(norms_(static_cast<Eigen::Index>(i)) > 0.0 && std::isfinite(norms_(static_cast<Eigen::Index>(i))),
            ErrorCode::kZeroEmbedding, "zero or non-finite embedding for " + ids_[i]);
  }
}

std::optional<size_t> EmbeddingIndex::row_of(const std::string& id) const {
  const auto it = by_id_.find(id);
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

std::string_view IndexModeName(IndexMode mode) {
  return mode == IndexMode::kModelTarget ? "model_target" : "image_only_baseline";
}

IndexMode ParseIndexMode(std::string_view name) {
  if (name == "model_target") return IndexMode::kModelTarget;
  if (name == "image_only_baseline") return IndexMode::kImageOnlyBaseline;
  Fail(ErrorCode::kInvalidConfig, "unknown index mode " + std::string(name));
}

EmbeddingIndex BuildIndex(const std::vector<const ImageRecord*>& images, const Checkpoint& ckpt, IndexMode) {
  Require(!images.empty(), ErrorCode::kEmptyIndex, "no images to index");
  std::vector<std::string> ids;
  std::vector<const Image*> pixels;
  std::unordered_set<std::string> seen;
  for (const ImageRecord* r : images) {
    Require(seen.insert(r->id).second, ErrorCode::kDuplicateId, "duplicate index id " + r->id);
    ids.push_back(r->id);
    pixels.push_back(&r->pixels);
  }
  return EmbeddingIndex(std::move(ids), EmbedTargets(ckpt, pixels, false));
}

Ranking Retrieve(const Vec& query, const EmbeddingIndex& index, size_t k, const std::optional<std::string>& exclude) {
  Require(index.size() > 0, ErrorCode::kEmptyIndex, "retrieval from an empty index");
  Require(k >= 1, ErrorCode::kInvalidConfig, "k must be at least 1");
  const double qn = QueryNorm(query, index);
  std::vector<ScoredId> scored;
  scored.reserve(index.size());
  for (size_t i = 0; i < index.size(); ++i) {
    if (exclude && index.ids()[i] == *exclude) continue;
    scored.push_back({index.ids()[i], Cosine(query, qn, index, i)});
  }
  return TopK(std::move(scored), k);
}

Ranking RetrieveAmong(const Vec& query, const EmbeddingIndex& index, const std::vector<std::string>& candidates,
                      size_t k) {
  Require(!candidates.empty(), ErrorCode::kEmptyIndex, "no candidates to rank");
  Require(k >= 1, ErrorCode::kInvalidConfig, "k must be at least 1");
  const double qn = QueryNorm(query, index);
  std::vector<ScoredId> scored;
  std::unordered_set<std::string> seen;
  for (const std::string& id : candidates) {
    if (!seen.insert(id).second) continue;
    const auto row = index.row_of(id);
    Require(row.has_value(), ErrorCode::kDanglingId, "candidate " + id + " is not in the index");
    scored.push_back({id, Cosine(query, qn, index, *row)});
  }
  return TopK(std::move(scored), k);
}

std::vector<QueryCase> CasesFromDataset(const TripletDataset& dataset) {
  std::vector<QueryCase> cases;
  cases.reserve(dataset.size());
  for (const Triplet& t : dataset) cases.push_back({t.ref_id, t.reformulation, t.target_id, t.subset});
  return cases;
}

double RecallAtK(const std::vector<QueryCase>& cases, const std::vector<Ranking>& rankings, size_t k) {
  Require(rankings.size() == cases.size(), ErrorCode::kMissingRanking,
          std::to_string(cases.size()) + " cases but " + std::to_string(rankings.size()) + " rankings");
  Require(k >= 1, ErrorCode::kInvalidConfig, "k must be at least 1");
  if (cases.empty()) return 0.0;
  size_t hits = 0;
  for (size_t i = 0; i < cases.size(); ++i) {
    const Ranking& r = rankings[i];
    const size_t n = std::min(k, r.size());
    for (size_t j = 0; j < n; ++j) {
      if (r[j].id == cases[i].gt_target_id) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(cases.size());
}

double RecallSubsetAtK(const std::vector<QueryCase>& cases, const Mat& queries, const EmbeddingIndex& index,
                       size_t k) {
  Require(queries.rows() == static_cast<Eigen::Index>(cases.size()), ErrorCode::kMissingRanking,
          "one query row per case is required");
  std::vector<Ranking> rankings;
  rankings.reserve(cases.size());
  for (size_t i = 0; i < cases.size(); ++i) {
    const QueryCase& c = cases[i];
    Require(c.subset.has_value(), ErrorCode::kGtNotInSubset, "case " + c.ref_id + " has no subset");
    Require(std::find(c.subset->begin(), c.subset->end(), c.gt_target_id) != c.subset->end(),
            ErrorCode::kGtNotInSubset, "ground truth " + c.gt_target_id + " missing from its subset");
    rankings.push_back(RetrieveAmong(queries.row(static_cast<Eigen::Index>(i)), index, *c.subset, k));
  }
  return RecallAtK(cases, rankings, k);
}

std::string_view QueryModeName(QueryMode mode) {
  switch (mode) {
    case QueryMode::kQuery: return "e_r";
    case QueryMode::kFused: return "e_f";
    case QueryMode::kImageOnly: return "image_only";
    case QueryMode::kTextOnly: return "text_only";
    case QueryMode::kSum: return "sum";
  }
  return "";
}

QueryMode ParseQueryMode(std::string_view name) {
  for (QueryMode m : {QueryMode::kQuery, QueryMode::kFused, QueryMode::kImageOnly, QueryMode::kTextOnly,
                      QueryMode::kSum}) {
    if (QueryModeName(m) == name) return m;
  }
  Fail(ErrorCode::kInvalidConfig, "unknown query mode " + std::string(name));
}

namespace {

Mat SumRows(const Mat& image, const Mat& text) {
  const Eigen::VectorXd in = image.rowwise().norm();
  const Eigen::VectorXd tn = text.rowwise().norm();
  Require((in.array() > 0.0).all() && (tn.array() > 0.0).all(), ErrorCode::kZeroVector,
          "cannot normalize a zero embedding");
  return image.array().colwise() / in.array() + text.array().colwise() / tn.array();
}

}  // namespace

Vec BaselineEmbed(const QueryCase& query_case, const Collection& collection, const Checkpoint& ckpt,
                  BaselineMode mode) {
  switch (mode) {
    case BaselineMode::kImageOnly:
      return EmbedTarget(ckpt, collection.at(query_case.ref_id).pixels, false);
    case BaselineMode::kTextOnly:
      return EncodeTexts(ckpt, {query_case.reformulation}).row(0);
    case BaselineMode::kSum: {
      const Mat img = EmbedTarget(ckpt, collection.at(query_case.ref_id).pixels, false);
      const Mat txt = EncodeTexts(ckpt, {query_case.reformulation});
      return SumRows(img, txt).row(0);
    }
  }
  return {};
}

Mat QueryEmbeddings(const std::vector<QueryCase>& cases, const Collection& collection, const Checkpoint& ckpt,
                    QueryMode mode) {
  std::vector<const Image*> images;
  std::vector<std::string> texts;
  for (const QueryCase& c : cases) {
    images.push_back(&collection.at(c.ref_id).pixels);
    texts.push_back(c.reformulation);
  }
  switch (mode) {
    case QueryMode::kQuery:
      return EmbedQueries(ckpt, images, texts);
    case QueryMode::kFused: {
      Mat pooled;
      const Mat q = EmbedQueries(ckpt, images, texts, &pooled);
      return FuseRows(q, pooled, ckpt.lambda);
    }
    case QueryMode::kImageOnly:
      return EmbedTargets(ckpt, images, false);
    case QueryMode::kTextOnly:
      return EncodeTexts(ckpt, texts);
    case QueryMode::kSum:
      return SumRows(EmbedTargets(ckpt, images, false), EncodeTexts(ckpt, texts));
  }
  return {};
}

}  // namespace zscir
