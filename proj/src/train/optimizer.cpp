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

#include "zscir/train/optimizer.hpp"

#include <cmath>

#include "zscir/common/error.hpp"

namespace zscir {

namespace {
bool EndsWith(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}
}  // namespace

void AdamW::Step(const ParamList& params, const ParamList& grads) {
  Require(params.size() == grads.size(), ErrorCode::kShapeMismatch, "parameter and gradient trees differ");
  if (m_.empty()) {
    for (const auto& [name, p] : params) {
      m_.push_back(Mat::Zero(p->rows(), p->cols()));
      v_.push_back(Mat::Zero(p->rows(), p->cols()));
    }
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (size_t i = 0; i < params.size(); ++i) {
    Mat& p = *params[i].second;
    const Mat& g = *grads[i].second;
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g.cwiseAbs2();
    if (cfg_.weight_decay > 0.0 && EndsWith(params[i].first, ".w")) p *= 1.0 - cfg_.learning_rate * cfg_.weight_decay;
    p.array() -= cfg_.learning_rate * (m_[i].array() / bc1) / ((v_[i].array() / bc2).sqrt() + cfg_.eps);
  }
}

double ScalarAdam::Step(double value, double grad) {
  ++t_;
  m_ = 0.9 * m_ + 0.1 * grad;
  v_ = 0.999 * v_ + 0.001 * grad * grad;
  const double mhat = m_ / (1.0 - std::pow(0.9, static_cast<double>(t_)));
  const double vhat = v_ / (1.0 - std::pow(0.999, static_cast<double>(t_)));
  return value - lr_ * mhat / (std::sqrt(vhat) + 1e-8);
}

double ClipGradNorm(const ParamList& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& [name, g] : grads) sq += g->squaredNorm();
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (const auto& [name, g] : grads) *g *= scale;
  }
  return norm;
}

}  // namespace zscir
