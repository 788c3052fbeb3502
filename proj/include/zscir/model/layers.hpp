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

#ifndef ZSCIR_MODEL_LAYERS_HPP_
#define ZSCIR_MODEL_LAYERS_HPP_

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "zscir/common/random.hpp"

namespace zscir {

// Sequences are stacked row-wise: a batch of n sequences of length L with
// width d is an (n * L) x d matrix, sequence s occupying rows [s*L, s*L + L).
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using ParamList = std::vector<std::pair<std::string, Mat*>>;
using ConstParamList = std::vector<std::pair<std::string, const Mat*>>;

// Uniform Xavier/Glorot initialization for a fan_in x fan_out matrix.
void XavierInit(Mat& w, Rng& rng);

Mat Gelu(const Mat& x);
Mat GeluGrad(const Mat& x);  // elementwise derivative

struct Linear {
  Mat w;  // in x out
  Mat b;  // 1 x out

  void Init(int in, int out, Rng& rng);
  Mat Forward(const Mat& x) const;
  // Accumulates parameter gradients into `grad` (if non-null), returns dL/dx.
  Mat Backward(const Mat& x, const Mat& dy, Linear* grad) const;
  void Collect(const std::string& prefix, ParamList& out);
};

struct LayerNorm {
  Mat gamma;  // 1 x d
  Mat beta;   // 1 x d

  struct Cache {
    Mat xhat;
    Eigen::VectorXd inv_std;
  };

  void Init(int d);
  Mat Forward(const Mat& x, Cache* cache) const;
  Mat Backward(const Mat& dy, const Cache& cache, LayerNorm* grad) const;
  void Collect(const std::string& prefix, ParamList& out);
};

// Which keys each query may see. `key_len[s]` (when given) limits sequence s
// to its first key_len[s] keys; `causal` additionally hides keys j > i.
struct AttnLayout {
  int n_seq = 1;
  int lq = 1;
  int lk = 1;
  const std::vector<int>* key_len = nullptr;
  bool causal = false;
};

// Multi-head scaled dot-product attention. Queries come from `xq`, keys and
// values from `xkv`; self-attention passes the same matrix twice.
struct Attention {
  int n_heads = 1;
  Linear q, k, v, o;

  struct Cache {
    Mat xq, xkv, qp, kp, vp, heads;
    std::vector<Mat> probs;  // n_seq * n_heads matrices of lq x lk
  };

  void Init(int d, int heads, Rng& rng, bool zero_output);
  Mat Forward(const Mat& xq, const Mat& xkv, const AttnLayout& layout, Cache* cache) const;
  // Returns (dL/dxq, dL/dxkv).
  std::pair<Mat, Mat> Backward(const Mat& dy, const AttnLayout& layout, const Cache& cache,
                               Attention* grad) const;
  void Collect(const std::string& prefix, ParamList& out);
};

struct Mlp {
  Linear fc1, fc2;

  struct Cache {
    Mat x, pre, act;
  };

  void Init(int d, int hidden, Rng& rng);
  Mat Forward(const Mat& x, Cache* cache) const;
  Mat Backward(const Mat& dy, const Cache& cache, Mlp* grad) const;
  void Collect(const std::string& prefix, ParamList& out);
};

}  // namespace zscir

#endif  // ZSCIR_MODEL_LAYERS_HPP_
