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

#include "zscir/model/network.hpp"

#include <algorithm>

#include "zscir/common/error.hpp"

namespace zscir {

namespace {

void NormalInit(Mat& m, Rng& rng, double stddev) {
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = stddev * rng.Normal();
}

constexpr double kEmbedInitStd = 0.02;

}  // namespace

// ---------------------------------------------------------------- TokenBatch

TokenBatch TokenBatch::From(const std::vector<TokenSequence>& seqs) {
  TokenBatch batch;
  batch.n = static_cast<int>(seqs.size());
  for (const auto& s : seqs) batch.len = std::max(batch.len, static_cast<int>(s.length()));
  batch.ids.assign(static_cast<size_t>(batch.n) * batch.len, Tokenizer::kNullId);
  for (int i = 0; i < batch.n; ++i) {
    const int len = static_cast<int>(seqs[i].length());
    Require(len >= 1, ErrorCode::kTokenOutOfRange, "empty token sequence in batch");
    batch.lengths.push_back(len);
    std::copy(seqs[i].ids.begin(), seqs[i].ids.begin() + len, batch.ids.begin() + i * batch.len);
  }
  return batch;
}

TokenBatch TokenBatch::Repeat(const TokenSequence& seq, int n) {
  return From(std::vector<TokenSequence>(static_cast<size_t>(n), seq));
}

// ---------------------------------------------------------------- TextBlock

void TextBlock::Init(const ModelConfig& cfg, Rng& rng) {
  ln1.Init(cfg.d_model);
  ln2.Init(cfg.d_model);
  attn.Init(cfg.d_model, cfg.n_heads, rng, false);
  mlp.Init(cfg.d_model, cfg.d_model * cfg.mlp_ratio, rng);
}

Mat TextBlock::Forward(const Mat& x, const AttnLayout& layout, Cache* cache) const {
  const Mat h1 = ln1.Forward(x, cache ? &cache->ln1 : nullptr);
  Mat x1 = x + attn.Forward(h1, h1, layout, cache ? &cache->attn : nullptr);
  const Mat h2 = ln2.Forward(x1, cache ? &cache->ln2 : nullptr);
  x1 += mlp.Forward(h2, cache ? &cache->mlp : nullptr);
  return x1;
}

Mat TextBlock::Backward(const Mat& dy, const AttnLayout& layout, const Cache& cache, TextBlock* grad) const {
  const Mat dh2 = mlp.Backward(dy, cache.mlp, grad ? &grad->mlp : nullptr);
  const Mat dx1 = dy + ln2.Backward(dh2, cache.ln2, grad ? &grad->ln2 : nullptr);
  auto [dq, dkv] = attn.Backward(dx1, layout, cache.attn, grad ? &grad->attn : nullptr);
  dq += dkv;
  return dx1 + ln1.Backward(dq, cache.ln1, grad ? &grad->ln1 : nullptr);
}

void TextBlock::Collect(const std::string& prefix, ParamList& out) {
  ln1.Collect(prefix + ".ln1", out);
  attn.Collect(prefix + ".attn", out);
  ln2.Collect(prefix + ".ln2", out);
  mlp.Collect(prefix + ".mlp", out);
}

// ---------------------------------------------------------------- ReformBlock

void ReformBlock::Init(const ModelConfig& cfg, Rng& rng) {
  ln1.Init(cfg.d_model);
  ln2.Init(cfg.d_model);
  ln3.Init(cfg.d_model);
  self_attn.Init(cfg.d_model, cfg.n_heads, rng, false);
  cross_attn.Init(cfg.d_model, cfg.n_heads, rng, true);
  mlp.Init(cfg.d_model, cfg.d_model * cfg.mlp_ratio, rng);
  if (!cfg.cross_attention) {
    ParamList params;
    cross_attn.Collect("", params);
    for (auto& [name, m] : params) m->setZero();
  }
}

Mat ReformBlock::Forward(const Mat& x, int n, int lv, const Mat& text, int lt,
                         const std::vector<int>& text_len, bool use_cross, Cache* cache) const {
  Require(x.cols() == text.cols(), ErrorCode::kDimensionMismatch, "image and text widths differ");
  Require(x.rows() == static_cast<Eigen::Index>(n) * lv && text.rows() == static_cast<Eigen::Index>(n) * lt,
          ErrorCode::kDimensionMismatch, "sequence rows do not match the batch layout");
  const AttnLayout self_layout{n, lv, lv, nullptr, false};
  const Mat h1 = ln1.Forward(x, cache ? &cache->ln1 : nullptr);
  Mat out = x + self_attn.Forward(h1, h1, self_layout, cache ? &cache->self_attn : nullptr);
  if (use_cross) {
    const AttnLayout cross_layout{n, lv, lt, &text_len, false};
    const Mat h2 = ln2.Forward(out, cache ? &cache->ln2 : nullptr);
    out += cross_attn.Forward(h2, text, cross_layout, cache ? &cache->cross_attn : nullptr);
  }
  const Mat h3 = ln3.Forward(out, cache ? &cache->ln3 : nullptr);
  out += mlp.Forward(h3, cache ? &cache->mlp : nullptr);
  return out;
}

Mat ReformBlock::Backward(const Mat& dy, int n, int lv, int lt, const std::vector<int>& text_len,
                          bool use_cross, const Cache& cache, ReformBlock* grad, Mat* dtext) const {
  const Mat dh3 = mlp.Backward(dy, cache.mlp, grad ? &grad->mlp : nullptr);
  Mat dx = dy + ln3.Backward(dh3, cache.ln3, grad ? &grad->ln3 : nullptr);
  if (use_cross) {
    const AttnLayout cross_layout{n, lv, lt, &text_len, false};
    auto [dq, dkv] = cross_attn.Backward(dx, cross_layout, cache.cross_attn, grad ? &grad->cross_attn : nullptr);
    if (dtext) *dtext += dkv;
    dx += ln2.Backward(dq, cache.ln2, grad ? &grad->ln2 : nullptr);
  }
  const AttnLayout self_layout{n, lv, lv, nullptr, false};
  auto [dq, dkv] = self_attn.Backward(dx, self_layout, cache.self_attn, grad ? &grad->self_attn : nullptr);
  dq += dkv;
  return dx + ln1.Backward(dq, cache.ln1, grad ? &grad->ln1 : nullptr);
}

void ReformBlock::Collect(const std::string& prefix, ParamList& out) {
  ln1.Collect(prefix + ".ln1", out);
  self_attn.Collect(prefix + ".self_attn", out);
  ln2.Collect(prefix + ".ln2", out);
  cross_attn.Collect(prefix + ".cross_attn", out);
  ln3.Collect(prefix + ".ln3", out);
  mlp.Collect(prefix + ".mlp", out);
}

// ---------------------------------------------------------------- TextEncoder

void TextEncoder::Init(const ModelConfig& cfg, Rng& rng) {
  token_embed.resize(cfg.text_vocab_size, cfg.d_model);
  NormalInit(token_embed, rng, kEmbedInitStd);
  pos_embed.resize(cfg.max_text_len, cfg.d_model);
  NormalInit(pos_embed, rng, kEmbedInitStd);
  blocks.resize(cfg.text_layers);
  for (auto& b : blocks) b.Init(cfg, rng);
  ln_final.Init(cfg.d_model);
}

TextEncoder::Output TextEncoder::Forward(const TokenBatch& tokens, Cache* cache) const {
  const int d = static_cast<int>(token_embed.cols());
  Require(tokens.len <= pos_embed.rows(), ErrorCode::kTokenOutOfRange, "token batch longer than max_text_len");
  Mat x(static_cast<Eigen::Index>(tokens.n) * tokens.len, d);
  for (int s = 0; s < tokens.n; ++s) {
    for (int p = 0; p < tokens.len; ++p) {
      const int id = tokens.ids[static_cast<size_t>(s) * tokens.len + p];
      Require(id >= 0 && id < token_embed.rows(), ErrorCode::kTokenOutOfRange,
              "token id " + std::to_string(id) + " outside the vocabulary");
      x.row(s * tokens.len + p) = token_embed.row(id) + pos_embed.row(p);
    }
  }
  const AttnLayout layout{tokens.n, tokens.len, tokens.len, &tokens.lengths, true};
  if (cache) cache->blocks.resize(blocks.size());
  for (size_t i = 0; i < blocks.size(); ++i) x = blocks[i].Forward(x, layout, cache ? &cache->blocks[i] : nullptr);
  Output out;
  out.seq = ln_final.Forward(x, cache ? &cache->ln_final : nullptr);
  out.pooled.resize(tokens.n, d);
  for (int s = 0; s < tokens.n; ++s) out.pooled.row(s) = out.seq.row(s * tokens.len + tokens.lengths[s] - 1);
  return out;
}

void TextEncoder::Backward(const TokenBatch& tokens, Mat dseq, const Mat& dpooled, const Cache& cache,
                           TextEncoder* grad) const {
  for (int s = 0; s < tokens.n; ++s) dseq.row(s * tokens.len + tokens.lengths[s] - 1) += dpooled.row(s);
  Mat dx = ln_final.Backward(dseq, cache.ln_final, grad ? &grad->ln_final : nullptr);
  const AttnLayout layout{tokens.n, tokens.len, tokens.len, &tokens.lengths, true};
  for (size_t i = blocks.size(); i-- > 0;)
    dx = blocks[i].Backward(dx, layout, cache.blocks[i], grad ? &grad->blocks[i] : nullptr);
  if (!grad) return;
  for (int s = 0; s < tokens.n; ++s) {
    for (int p = 0; p < tokens.len; ++p) {
      const int id = tokens.ids[static_cast<size_t>(s) * tokens.len + p];
      grad->token_embed.row(id) += dx.row(s * tokens.len + p);
      grad->pos_embed.row(p) += dx.row(s * tokens.len + p);
    }
  }
}

void TextEncoder::Collect(const std::string& prefix, ParamList& out) {
  out.emplace_back(prefix + ".token_embed", &token_embed);
  out.emplace_back(prefix + ".pos_embed", &pos_embed);
  for (size_t i = 0; i < blocks.size(); ++i) blocks[i].Collect(prefix + ".block" + std::to_string(i), out);
  ln_final.Collect(prefix + ".ln_final", out);
}

// ---------------------------------------------------------------- VisualEncoder

void VisualEncoder::Init(const ModelConfig& cfg, Rng& rng) {
  patch_embed.Init(cfg.patch_dim(), cfg.d_model, rng);
  pos_embed.resize(cfg.n_patches(), cfg.d_model);
  NormalInit(pos_embed, rng, kEmbedInitStd);
  blocks.resize(cfg.n_blocks);
  for (auto& b : blocks) b.Init(cfg, rng);
  ln_final.Init(cfg.d_model);
}

Mat VisualEncoder::Forward(const Mat& patches, int n, const Mat& text, int lt, const std::vector<int>& text_len,
                           bool use_cross, Cache* cache) const {
  const int lv = static_cast<int>(pos_embed.rows());
  Require(patches.cols() == patch_embed.w.rows() && patches.rows() == static_cast<Eigen::Index>(n) * lv,
          ErrorCode::kShapeMismatch, "patch matrix does not match the configured image layout");
  Mat x = patch_embed.Forward(patches);
  for (int s = 0; s < n; ++s) x.middleRows(s * lv, lv) += pos_embed;
  if (cache) {
    cache->patches = patches;
    cache->blocks.resize(blocks.size());
  }
  for (size_t i = 0; i < blocks.size(); ++i)
    x = blocks[i].Forward(x, n, lv, text, lt, text_len, use_cross, cache ? &cache->blocks[i] : nullptr);
  return ln_final.Forward(x, cache ? &cache->ln_final : nullptr);
}

void VisualEncoder::Backward(const Mat& dz, int n, int lt, const std::vector<int>& text_len, bool use_cross,
                             const Cache& cache, VisualEncoder* grad, Mat* dtext) const {
  const int lv = static_cast<int>(pos_embed.rows());
  Mat dx = ln_final.Backward(dz, cache.ln_final, grad ? &grad->ln_final : nullptr);
  for (size_t i = blocks.size(); i-- > 0;)
    dx = blocks[i].Backward(dx, n, lv, lt, text_len, use_cross, cache.blocks[i], grad ? &grad->blocks[i] : nullptr,
                            dtext);
  if (!grad) return;
  for (int s = 0; s < n; ++s) grad->pos_embed += dx.middleRows(s * lv, lv);
  patch_embed.Backward(cache.patches, dx, &grad->patch_embed);
}

void VisualEncoder::Collect(const std::string& prefix, ParamList& out) {
  patch_embed.Collect(prefix + ".patch_embed", out);
  out.emplace_back(prefix + ".pos_embed", &pos_embed);
  for (size_t i = 0; i < blocks.size(); ++i) blocks[i].Collect(prefix + ".block" + std::to_string(i), out);
  ln_final.Collect(prefix + ".ln_final", out);
}

// ---------------------------------------------------------------- Predictor

void Predictor::Init(const ModelConfig& cfg, Rng& rng) {
  fc1.Init(2 * cfg.d_model, cfg.d_model, rng);
  fc2.Init(cfg.d_model, cfg.d_model, rng);
}

Mat Predictor::Forward(const Mat& z, int n, const Mat& text_pooled, Cache* cache) const {
  const Eigen::Index d = z.cols();
  Require(n > 0 && z.rows() % n == 0 && z.rows() > 0, ErrorCode::kDimensionMismatch,
          "visual sequence rows do not split into the batch");
  Require(text_pooled.rows() == n && text_pooled.cols() == d && 2 * d == fc1.w.rows(),
          ErrorCode::kDimensionMismatch, "predictor input widths do not match");
  const Eigen::Index lv = z.rows() / n;
  Mat input(n, 2 * d);
  for (int s = 0; s < n; ++s) {
    input.row(s).head(d) = z.middleRows(s * lv, lv).colwise().mean();
    input.row(s).tail(d) = text_pooled.row(s);
  }
  Mat pre = fc1.Forward(input);
  Mat act = Gelu(pre);
  Mat e = fc2.Forward(act);
  if (cache) {
    cache->input = std::move(input);
    cache->pre = std::move(pre);
    cache->act = std::move(act);
  }
  return e;
}

Mat Predictor::Backward(const Mat& de, int n, int lv, const Cache& cache, Predictor* grad,
                        Mat* dtext_pooled) const {
  const Eigen::Index d = de.cols();
  const Mat dact = fc2.Backward(cache.act, de, grad ? &grad->fc2 : nullptr);
  const Mat dpre = dact.array() * GeluGrad(cache.pre).array();
  const Mat dinput = fc1.Backward(cache.input, dpre, grad ? &grad->fc1 : nullptr);
  if (dtext_pooled) *dtext_pooled = dinput.rightCols(d);
  Mat dz(static_cast<Eigen::Index>(n) * lv, d);
  for (int s = 0; s < n; ++s)
    dz.middleRows(s * lv, lv).rowwise() = dinput.row(s).head(d) / static_cast<double>(lv);
  return dz;
}

void Predictor::Collect(const std::string& prefix, ParamList& out) {
  fc1.Collect(prefix + ".fc1", out);
  fc2.Collect(prefix + ".fc2", out);
}

// ---------------------------------------------------------------- Model

void Model::Init(const ModelConfig& cfg, Rng& rng) {
  text.Init(cfg, rng);
  visual.Init(cfg, rng);
  predictor.Init(cfg, rng);
}

ParamList Model::Params() {
  ParamList out;
  text.Collect("text", out);
  visual.Collect("visual", out);
  predictor.Collect("predictor", out);
  return out;
}

ConstParamList Model::Params() const {
  ConstParamList out;
  for (auto& [name, m] : const_cast<Model*>(this)->Params()) out.emplace_back(name, m);
  return out;
}

ParamList TargetModel::Params() {
  ParamList out;
  text.Collect("text", out);
  visual.Collect("visual", out);
  predictor.Collect("predictor", out);
  return out;
}

ConstParamList TargetModel::Params() const {
  ConstParamList out;
  for (auto& [name, m] : const_cast<TargetModel*>(this)->Params()) out.emplace_back(name, m);
  return out;
}

// ---------------------------------------------------------------- batched embedding

Mat ImagePatches(const Image& image, const ModelConfig& cfg) {
  Require(image.height == cfg.image_size && image.width == cfg.image_size && image.channels == cfg.channels,
          ErrorCode::kShapeMismatch,
          "image is " + std::to_string(image.height) + "x" + std::to_string(image.width) + "x" +
              std::to_string(image.channels) + ", model expects " + std::to_string(cfg.image_size) + "x" +
              std::to_string(cfg.image_size) + "x" + std::to_string(cfg.channels));
  const int side = cfg.patches_per_side();
  const int ps = cfg.patch_size;
  Mat out(cfg.n_patches(), cfg.patch_dim());
  for (int py = 0; py < side; ++py) {
    for (int px = 0; px < side; ++px) {
      const int row = py * side + px;
      int col = 0;
      for (int y = 0; y < ps; ++y)
        for (int x = 0; x < ps; ++x)
          for (int c = 0; c < cfg.channels; ++c) out(row, col++) = image.at(py * ps + y, px * ps + x, c);
    }
  }
  return out;
}

Mat EmbedBatch(const ModelConfig& cfg, const TextEncoder& text, const VisualEncoder& visual,
               const Predictor& predictor, const Mat& patches, const TokenBatch& tokens, EmbedCache* cache,
               Mat* text_pooled) {
  const int n = tokens.n;
  TextEncoder::Output text_out = text.Forward(tokens, cache ? &cache->text : nullptr);
  const Mat z = visual.Forward(patches, n, text_out.seq, tokens.len, tokens.lengths, cfg.cross_attention,
                               cache ? &cache->visual : nullptr);
  Mat e = predictor.Forward(z, n, text_out.pooled, cache ? &cache->predictor : nullptr);
  if (text_pooled) *text_pooled = text_out.pooled;
  if (cache) {
    cache->n = n;
    cache->tokens = tokens;
    cache->text_out = std::move(text_out);
  }
  return e;
}

void EmbedBatchBackward(const ModelConfig& cfg, const TextEncoder& text, const VisualEncoder& visual,
                        const Predictor& predictor, const Mat& de, const EmbedCache& cache,
                        TextEncoder* grad_text, VisualEncoder* grad_visual, Predictor* grad_predictor) {
  const int n = cache.n;
  const int lv = cfg.n_patches();
  Mat dpooled;
  const Mat dz = predictor.Backward(de, n, lv, cache.predictor, grad_predictor, &dpooled);
  Mat dseq = Mat::Zero(cache.text_out.seq.rows(), cache.text_out.seq.cols());
  if (grad_visual || grad_text) {
    visual.Backward(dz, n, cache.tokens.len, cache.tokens.lengths, cfg.cross_attention, cache.visual, grad_visual,
                    grad_text ? &dseq : nullptr);
  }
  if (grad_text) text.Backward(cache.tokens, std::move(dseq), dpooled, cache.text, grad_text);
}

}  // namespace zscir
