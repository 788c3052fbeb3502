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

#ifndef ZSCIR_TRAIN_LOSS_HPP_
#define ZSCIR_TRAIN_LOSS_HPP_

#include "zscir/model/layers.hpp"

namespace zscir {

// Batch contrastive loss over cosine similarities:
//   L = (1/B) sum_i -log softmax_j(tau * cos(r_i, t_j))[i]
// evaluated with max-subtraction. Rows of `queries` and `targets` pair up.
double ContrastiveLoss(const Mat& queries, const Mat& targets, double tau);

struct LossGradient {
  double loss = 0.0;
  Mat d_queries;
  Mat d_targets;
  double d_tau = 0.0;
};

LossGradient ContrastiveLossGradient(const Mat& queries, const Mat& targets, double tau);

// Row-wise cosine similarity matrix, queries x targets.
Mat CosineMatrix(const Mat& queries, const Mat& targets);

}  // namespace zscir

#endif  // ZSCIR_TRAIN_LOSS_HPP_
