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

#include "zscir/train/loss.hpp"

#include <cmath>

#include "zscir/common/error.hpp"

namespace zscir {

namespace {

void CheckInputs(const Mat& queries, const Mat& targets, double tau) {
  Require(queries.rows() == targets.rows() && queries.cols() == targets.cols() && queries.rows() > 0,
          ErrorCode::kDimensionMismatch, "query and target batches must have the same non-empty shape");
  Require(tau > 0.0, ErrorCode::kNonPositiveTemperature, "temperature must be positive");
}

Eigen::VectorXd RowNorms(const Mat& m) {
  Eigen::VectorXd norms = m.rowwise().norm();
  for (Eigen::Index i = 0; i < norms.size(); ++i)
    Require(norms(i) != 0.0, ErrorCode::kZeroVector, "cosine similarity of a zero row is undefined");
  return norms;
}

struct Forward {
  Mat u, v;  // row-normalized inputs
  Eigen::VectorXd ru, rv;
  Mat cos;
  Mat probs;  // row softmax of tau * cos
  double loss = 0.0;
};

Forward Run(const Mat& queries, const Mat& targets, double tau) {
  CheckInputs(queries, targets, tau);
  Forward f;
  f.ru = RowNorms(queries);
  f.rv = RowNorms(targets);
  f.u = queries.array().colwise() / f.ru.array();
  f.v = targets.array().colwise() / f.rv.array();
  f.cos.noalias() = f.u * f.v.transpose();
  const Eigen::Index b = queries.rows();
  f.probs.resize(b, b);
  double total = 0.0;
  for (Eigen::Index i = 0; i < b; ++i) {
    const double m = tau * f.cos.row(i).maxCoeff();
    double z = 0.0;
    for (Eigen::Index j = 0; j < b; ++j) {
      f.probs(i, j) = std::exp(tau * f.cos(i, j) - m);
      z += f.probs(i, j);
    }
    f.probs.row(i) /= z;
    total += m + std::log(z) - tau * f.cos(i, i);
  }
  f.loss = total / static_cast<double>(b);
  return f;
}

}  // namespace

Mat CosineMatrix(const Mat& queries, const Mat& targets) {
  const Eigen::VectorXd ru = RowNorms(queries);
  const Eigen::VectorXd rv = RowNorms(targets);
  Mat u = queries.array().colwise() / ru.array();
  Mat v = targets.array().colwise() / rv.array();
  return u * v.transpose();
}

double ContrastiveLoss(const Mat& queries, const Mat& targets, double tau) {
  if (queries.rows() == 1) {
    CheckInputs(queries, targets, tau);
    RowNorms(queries);
    RowNorms(targets);
    return 0.0;
  }
  return Run(queries, targets, tau).loss;
}

LossGradient ContrastiveLossGradient(const Mat& queries, const Mat& targets, double tau) {
  Forward f = Run(queries, targets, tau);
  const Eigen::Index b = queries.rows();
  LossGradient g;
  g.loss = b == 1 ? 0.0 : f.loss;
  // dL/dlogits = (softmax - I) / B; logits = tau * cos.
  Mat dlogits = f.probs;
  dlogits.diagonal().array() -= 1.0;
  dlogits /= static_cast<double>(b);
  if (b == 1) dlogits.setZero();
  g.d_tau = (dlogits.array() * f.cos.array()).sum();
  const Mat dcos = tau * dlogits;
  Mat du = dcos * f.v;
  Mat dv = dcos.transpose() * f.u;
  // Through the row normalization: d(x/|x|) = (I - u u^T) / |x|.
  const Eigen::VectorXd du_dot = (du.array() * f.u.array()).rowwise().sum();
  const Eigen::VectorXd dv_dot = (dv.array() * f.v.array()).rowwise().sum();
  g.d_queries = (du - Mat(f.u.array().colwise() * du_dot.array())).array().colwise() / f.ru.array();
  g.d_targets = (dv - Mat(f.v.array().colwise() * dv_dot.array())).array().colwise() / f.rv.array();
  return g;
}

}  // namespace zscir
