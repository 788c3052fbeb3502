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

#ifndef ZSCIR_TRAIN_OPTIMIZER_HPP_
#define ZSCIR_TRAIN_OPTIMIZER_HPP_

#include <vector>

#include "zscir/model/layers.hpp"

namespace zscir {

struct AdamWConfig {
  double learning_rate = 3e-4;
  double weight_decay = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// AdamW with decoupled weight decay. Decay applies to weight matrices (names
// ending in ".w") only; biases, norms and embeddings are not decayed.
class AdamW {
 public:
  explicit AdamW(AdamWConfig cfg) : cfg_(cfg) {}

  void Step(const ParamList& params, const ParamList& grads);
  int64_t steps() const { return t_; }

 private:
  AdamWConfig cfg_;
  std::vector<Mat> m_, v_;
  int64_t t_ = 0;
};

// Adam on a single unconstrained scalar (used for log-temperature and the
// combiner logit).
class ScalarAdam {
 public:
  explicit ScalarAdam(double learning_rate) : lr_(learning_rate) {}
  double Step(double value, double grad);

 private:
  double lr_;
  double m_ = 0.0, v_ = 0.0;
  int64_t t_ = 0;
};

// Scales all gradients so their joint L2 norm is at most max_norm. Returns
// the norm before clipping.
double ClipGradNorm(const ParamList& grads, double max_norm);

}  // namespace zscir

#endif  // ZSCIR_TRAIN_OPTIMIZER_HPP_
