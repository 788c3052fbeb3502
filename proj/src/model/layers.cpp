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

#include "zscir/model/layers.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace zscir {

void XavierInit(Mat& w, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.Uniform(-limit, limit);
}

Mat Gelu(const Mat& x) {
  return x.unaryExpr([](double v) { return 0.5 * v * (1.0 + std::erf(v * std::numbers::sqrt2 / 2.0)); });
}

Mat GeluGrad(const Mat& x) {
  static const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  return x.unaryExpr([](double v) {
    const double cdf = 0.5 * (1.0 + std::erf(v * std::numbers::sqrt2 / 2.0));
    return cdf + v * kInvSqrt2Pi * std::exp(-0.5 * v * v);
  });
}

// ---------------------------------------------------------------- Linear

void Linear::Init(int in, int out, Rng& rng) {
  w.resize(in, out);
  XavierInit(w, rng);
  b = Mat::Zero(1, out);
}

Mat Linear::Forward(const Mat& x) const {
  Mat y(x.rows(), w.cols());
  y.noalias() = x * w;
  y.rowwise() += b.row(0);
  return y;
}

Mat Linear::Backward(const Mat& x, const Mat& dy, Linear* grad) const {
  if (grad) {
    grad->w.noalias() += x.transpose() * dy;
    grad->b += dy.colwise().sum();
  }
  Mat dx(dy.rows(), w.rows());
  dx.noalias() = dy * w.transpose();
  return dx;
}

void Linear::Collect(const std::string& prefix, ParamList& out) {
  out.emplace_back(prefix + ".w", &w);
  out.emplace_back(prefix + ".b", &b);
}

// ---------------------------------------------------------------- LayerNorm

namespace {
constexpr double kLayerNormEps = 1e-5;
}

void LayerNorm::Init(int d) {
  gamma = Mat::Ones(1, d);
  beta = Mat::Zero(1, d);
}

Mat LayerNorm::Forward(const Mat& x, Cache* cache) const {
  const Eigen::Index d = x.cols();
  Eigen::VectorXd mean = x.rowwise().mean();
  Mat centered = x.colwise() - mean;
  Eigen::VectorXd var = centered.rowwise().squaredNorm() / static_cast<double>(d);
  Eigen::VectorXd inv_std = (var.array() + kLayerNormEps).rsqrt().matrix();
  Mat xhat = centered.array().colwise() * inv_std.array();
  Mat y = xhat.array().rowwise() * gamma.row(0).array();
  y.rowwise() += beta.row(0);
  if (cache) {
    cache->xhat = std::move(xhat);
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

Mat LayerNorm::Backward(const Mat& dy, const Cache& cache, LayerNorm* grad) const {
  if (grad) {
    grad->gamma += (dy.array() * cache.xhat.array()).colwise().sum().matrix();
    grad->beta += dy.colwise().sum();
  }
  const double d = static_cast<double>(dy.cols());
  Mat dxhat = dy.array().rowwise() * gamma.row(0).array();
  Eigen::VectorXd sum_dxhat = dxhat.rowwise().sum();
  Eigen::VectorXd sum_dxhat_xhat = (dxhat.array() * cache.xhat.array()).rowwise().sum();
  Mat dx = (d * dxhat.array()).colwise() - sum_dxhat.array();
  dx.array() -= cache.xhat.array().colwise() * sum_dxhat_xhat.array();
  dx.array().colwise() *= cache.inv_std.array() / d;
  return dx;
}

void LayerNorm::Collect(const std::string& prefix, ParamList& out) {
  out.emplace_back(prefix + ".gamma", &gamma);
  out.emplace_back(prefix + ".beta", &beta);
}

// ---------------------------------------------------------------- Attention

void Attention::Init(int d, int heads, Rng& rng, bool zero_output) {
  n_heads = heads;
  q.Init(d, d, rng);
  k.Init(d, d, rng);
  v.Init(d, d, rng);
  o.Init(d, d, rng);
  if (zero_output) o.w.setZero();
}

Mat Attention::Forward(const Mat& xq, const Mat& xkv, const AttnLayout& layout, Cache* cache) const {
  const int d = static_cast<int>(q.w.cols());
  const int dh = d / n_heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  Mat qp = q.Forward(xq);
  Mat kp = k.Forward(xkv);
  Mat vp = v.Forward(xkv);
  Mat heads(qp.rows(), d);
  if (cache) {
    cache->probs.resize(static_cast<size_t>(layout.n_seq) * n_heads);
  }
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  Mat scores(layout.lq, layout.lk);
  for (int s = 0; s < layout.n_seq; ++s) {
    const int valid = layout.key_len ? (*layout.key_len)[s] : layout.lk;
    for (int h = 0; h < n_heads; ++h) {
      auto qs = qp.block(s * layout.lq, h * dh, layout.lq, dh);
      auto ks = kp.block(s * layout.lk, h * dh, layout.lk, dh);
      auto vs = vp.block(s * layout.lk, h * dh, layout.lk, dh);
      scores.noalias() = qs * ks.transpose();
      scores *= scale;
      for (int i = 0; i < layout.lq; ++i) {
        const int limit = layout.causal ? std::min(valid, i + 1) : valid;
        for (int j = limit; j < layout.lk; ++j) scores(i, j) = kNegInf;
        const double row_max = scores.row(i).head(limit).maxCoeff();
        double total = 0.0;
        for (int j = 0; j < limit; ++j) {
          scores(i, j) = std::exp(scores(i, j) - row_max);
          total += scores(i, j);
        }
        for (int j = 0; j < limit; ++j) scores(i, j) /= total;
        for (int j = limit; j < layout.lk; ++j) scores(i, j) = 0.0;
      }
      heads.block(s * layout.lq, h * dh, layout.lq, dh).noalias() = scores * vs;
      if (cache) cache->probs[static_cast<size_t>(s) * n_heads + h] = scores;
    }
  }
  Mat y = o.Forward(heads);
  if (cache) {
    cache->xq = xq;
    cache->xkv = xkv;
    cache->qp = std::move(qp);
    cache->kp = std::move(kp);
    cache->vp = std::move(vp);
    cache->heads = std::move(heads);
  }
  return y;
}

std::pair<Mat, Mat> Attention::Backward(const Mat& dy, const AttnLayout& layout, const Cache& cache,
                                        Attention* grad) const {
  const int d = static_cast<int>(q.w.cols());
  const int dh = d / n_heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const Mat dheads = o.Backward(cache.heads, dy, grad ? &grad->o : nullptr);
  Mat dq = Mat::Zero(cache.qp.rows(), d);
  Mat dk = Mat::Zero(cache.kp.rows(), d);
  Mat dv = Mat::Zero(cache.vp.rows(), d);
  Mat dp(layout.lq, layout.lk);
  for (int s = 0; s < layout.n_seq; ++s) {
    for (int h = 0; h < n_heads; ++h) {
      const Mat& p = cache.probs[static_cast<size_t>(s) * n_heads + h];
      auto dout = dheads.block(s * layout.lq, h * dh, layout.lq, dh);
      auto qs = cache.qp.block(s * layout.lq, h * dh, layout.lq, dh);
      auto ks = cache.kp.block(s * layout.lk, h * dh, layout.lk, dh);
      auto vs = cache.vp.block(s * layout.lk, h * dh, layout.lk, dh);
      dv.block(s * layout.lk, h * dh, layout.lk, dh).noalias() += p.transpose() * dout;
      dp.noalias() = dout * vs.transpose();
      // Softmax Jacobian; masked entries have p = 0 and drop out.
      Eigen::VectorXd row_dot = (dp.array() * p.array()).rowwise().sum();
      dp = (p.array() * (dp.array().colwise() - row_dot.array())) * scale;
      dq.block(s * layout.lq, h * dh, layout.lq, dh).noalias() += dp * ks;
      dk.block(s * layout.lk, h * dh, layout.lk, dh).noalias() += dp.transpose() * qs;
    }
  }
  Mat dxq = q.Backward(cache.xq, dq, grad ? &grad->q : nullptr);
  Mat dxkv = k.Backward(cache.xkv, dk, grad ? &grad->k : nullptr);
  dxkv += v.Backward(cache.xkv, dv, grad ? &grad->v : nullptr);
  return {std::move(dxq), std::move(dxkv)};
}

void Attention::Collect(const std::string& prefix, ParamList& out) {
  q.Collect(prefix + ".q", out);
  k.Collect(prefix + ".k", out);
  v.Collect(prefix + ".v", out);
  o.Collect(prefix + ".o", out);
}

// ---------------------------------------------------------------- Mlp

void Mlp::Init(int d, int hidden, Rng& rng) {
  fc1.Init(d, hidden, rng);
  fc2.Init(hidden, d, rng);
}

Mat Mlp::Forward(const Mat& x, Cache* cache) const {
  Mat pre = fc1.Forward(x);
  Mat act = Gelu(pre);
  Mat y = fc2.Forward(act);
  if (cache) {
    cache->x = x;
    cache->pre = std::move(pre);
    cache->act = std::move(act);
  }
  return y;
}

Mat Mlp::Backward(const Mat& dy, const Cache& cache, Mlp* grad) const {
  Mat dact = fc2.Backward(cache.act, dy, grad ? &grad->fc2 : nullptr);
  Mat dpre = dact.array() * GeluGrad(cache.pre).array();
  return fc1.Backward(cache.x, dpre, grad ? &grad->fc1 : nullptr);
}

void Mlp::Collect(const std::string& prefix, ParamList& out) {
  fc1.Collect(prefix + ".fc1", out);
  fc2.Collect(prefix + ".fc2", out);
}

}  // namespace zscir
