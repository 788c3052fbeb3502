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

#ifndef ZSCIR_MODEL_EMBED_HPP_
#define ZSCIR_MODEL_EMBED_HPP_

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "zscir/model/checkpoint.hpp"
#include "zscir/pipeline/image_record.hpp"

namespace zscir {

using Vec = Eigen::RowVectorXd;

// Text sequence (one row per token, positions added) and its pooled vector.
std::pair<SeqEmbedding, Vec> EncodeText(const Checkpoint& ckpt, const TokenSequence& tokens);

// Final visual sequence f(x, t) from the online encoder.
SeqEmbedding Encode(const Checkpoint& ckpt, const Image& image, const TokenSequence& tokens);

// g(z, pooled text) with the online predictor.
Vec Predict(const Checkpoint& ckpt, const SeqEmbedding& z, const Vec& text_pooled);

// Query embedding e_r for a reference image and a modification text.
Vec EmbedQuery(const Checkpoint& ckpt, const Image& image, const std::string& text);

// Target embedding e_t: the null-text path, on the EMA copy when use_ema is
// set and on the online weights otherwise.
Vec EmbedTarget(const Checkpoint& ckpt, const Image& image, bool use_ema);

// Batched versions used by training and evaluation. Rows follow input order.
Mat EmbedQueries(const Checkpoint& ckpt, const std::vector<const Image*>& images,
                 const std::vector<std::string>& texts, Mat* text_pooled = nullptr);
Mat EmbedTargets(const Checkpoint& ckpt, const std::vector<const Image*>& images, bool use_ema);
Mat EncodeTexts(const Checkpoint& ckpt, const std::vector<std::string>& texts);

// Stacked patch rows of several images.
Mat StackPatches(const std::vector<const Image*>& images, const ModelConfig& cfg);

}  // namespace zscir

#endif  // ZSCIR_MODEL_EMBED_HPP_
