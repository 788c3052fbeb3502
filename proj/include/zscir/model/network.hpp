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

#ifndef ZSCIR_MODEL_NETWORK_HPP_
#define ZSCIR_MODEL_NETWORK_HPP_

#include <string>
#include <vector>

#include "zscir/common/image.hpp"
#include "zscir/model/config.hpp"
#include "zscir/model/layers.hpp"
#include "zscir/model/tokenizer.hpp"

namespace zscir {

enum class Modality { kVisual, kText };

struct SeqEmbedding {
  Mat values;  // L x d
  Modality modality = Modality::kVisual;
};

// Token sequences padded to a common length for batched execution.
struct TokenBatch {
  int n = 0;
  int len = 0;
  std::vector<int> ids;      // n * len, padding uses the null id
  std::vector<int> lengths;  // real tokens per sequence, all >= 1

  static TokenBatch From(const std::vector<TokenSequence>& seqs);
  static TokenBatch Repeat(const TokenSequence& seq, int n);
};

// Pre-norm causal transformer layer of the text encoder.
struct TextBlock {
  LayerNorm ln1, ln2;
  Attention attn;
  Mlp mlp;

  struct Cache {
    LayerNorm::Cache ln1, ln2;
    Attention::Cache attn;
    Mlp::Cache mlp;
  };

  void Init(const ModelConfig& cfg, Rng& rng);
  Mat Forward(const Mat& x, const AttnLayout& layout, Cache* cache) const;
  Mat Backward(const Mat& dy, const AttnLayout& layout, const Cache& cache, TextBlock* grad) const;
  void Collect(const std::string& prefix, ParamList& out);
};

// Reformulation block: self-attention over image tokens, cross-attention with
// text tokens as keys and values, then an MLP; each sub-layer is pre-normed
// and residual.
struct ReformBlock {
  LayerNorm ln1, ln2, ln3;
  Attention self_attn, cross_attn;
  Mlp mlp;

  struct Cache {
    LayerNorm::Cache ln1, ln2, ln3;
    Attention::Cache self_attn, cross_attn;
    Mlp::Cache mlp;
  };

  void Init(const ModelConfig& cfg, Rng& rng);
  // x: n * lv rows of image tokens; text: n * lt rows with text_len[s] real
  // tokens in sequence s. With use_cross false the cross-attention sub-layer
  // is skipped.
  Mat Forward(const Mat& x, int n, int lv, const Mat& text, int lt, const std::vector<int>& text_len,
              bool use_cross, Cache* cache) const;
  // Returns dL/dx and adds dL/dtext into *dtext.
  Mat Backward(const Mat& dy, int n, int lv, int lt, const std::vector<int>& text_len, bool use_cross,
               const Cache& cache, ReformBlock* grad, Mat* dtext) const;
  void Collect(const std::string& prefix, ParamList& out);
};

struct TextEncoder {
  Mat token_embed;  // vocab x d
  Mat pos_embed;    // max_text_len x d
  std::vector<TextBlock> blocks;
  LayerNorm ln_final;

  struct Output {
    Mat seq;     // n * len x d
    Mat pooled;  // n x d, taken at the last real token (<eos>, or the null token)
  };
  struct Cache {
    std::vector<TextBlock::Cache> blocks;
    LayerNorm::Cache ln_final;
  };

  void Init(const ModelConfig& cfg, Rng& rng);
  Output Forward(const TokenBatch& tokens, Cache* cache) const;
  void Backward(const TokenBatch& tokens, Mat dseq, const Mat& dpooled, const Cache& cache,
                TextEncoder* grad) const;
  void Collect(const std::string& prefix, ParamList& out);
};

struct VisualEncoder {
  Linear patch_embed;  // patch_dim -> d
  Mat pos_embed;       // n_patches x d
  std::vector<ReformBlock> blocks;
  LayerNorm ln_final;

  struct Cache {
    Mat patches;
    std::vector<ReformBlock::Cache> blocks;
    LayerNorm::Cache ln_final;
  };

  void Init(const ModelConfig& cfg, Rng& rng);
  Mat Forward(const Mat& patches, int n, const Mat& text, int lt, const std::vector<int>& text_len,
              bool use_cross, Cache* cache) const;
  void Backward(const Mat& dz, int n, int lt, const std::vector<int>& text_len, bool use_cross,
                const Cache& cache, VisualEncoder* grad, Mat* dtext) const;
  void Collect(const std::string& prefix, ParamList& out);
};

// Mean-pools the visual sequence, concatenates the pooled text vector and
// maps the 2d-wide result through a two-layer MLP to the d-wide embedding.
struct Predictor {
  Linear fc1, fc2;

  struct Cache {
    Mat input, pre, act;
  };

  void Init(const ModelConfig& cfg, Rng& rng);
  Mat Forward(const Mat& z, int n, const Mat& text_pooled, Cache* cache) const;
  // Returns dL/dz and writes dL/dtext_pooled.
  Mat Backward(const Mat& de, int n, int lv, const Cache& cache, Predictor* grad, Mat* dtext_pooled) const;
  void Collect(const std::string& prefix, ParamList& out);
};

struct Model {
  TextEncoder text;
  VisualEncoder visual;
  Predictor predictor;

  void Init(const ModelConfig& cfg, Rng& rng);
  ParamList Params();
  ConstParamList Params() const;
};

// The stop-gradient copy of the whole null-text path: text encoder, visual
// encoder and predictor.
struct TargetModel {
  TextEncoder text;
  VisualEncoder visual;
  Predictor predictor;

  ParamList Params();
  ConstParamList Params() const;
};

// A model-shaped tree of zeros, used as a gradient accumulator.
template <typename T>
T ZerosLike(const T& model) {
  T out = model;
  for (auto& [name, m] : out.Params()) m->setZero();
  return out;
}

// Flattens an image into n_patches rows of patch_dim values (patches in
// raster order, pixels within a patch row-major with channels innermost).
Mat ImagePatches(const Image& image, const ModelConfig& cfg);

// Everything the backward pass needs from one batched embedding forward.
struct EmbedCache {
  int n = 0;
  TokenBatch tokens;
  TextEncoder::Cache text;
  TextEncoder::Output text_out;
  VisualEncoder::Cache visual;
  Predictor::Cache predictor;
};

// Batched e = g(f(x, t), phi(t)). `patches` stacks n images' patch rows.
// The three modules may come from the online model or the target copy.
Mat EmbedBatch(const ModelConfig& cfg, const TextEncoder& text, const VisualEncoder& visual,
               const Predictor& predictor, const Mat& patches, const TokenBatch& tokens,
               EmbedCache* cache, Mat* text_pooled = nullptr);

// Backward of EmbedBatch; any of the gradient targets may be null to stop the
// gradient there.
void EmbedBatchBackward(const ModelConfig& cfg, const TextEncoder& text, const VisualEncoder& visual,
                        const Predictor& predictor, const Mat& de, const EmbedCache& cache,
                        TextEncoder* grad_text, VisualEncoder* grad_visual, Predictor* grad_predictor);

}  // namespace zscir

#endif  // ZSCIR_MODEL_NETWORK_HPP_
