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

#include "zscir/model/embed.hpp"

#include <algorithm>

#include "zscir/common/error.hpp"

namespace zscir {

namespace {

constexpr size_t kChunk = 64;

std::vector<TokenSequence> Tokenize(const Checkpoint& ckpt, const std::vector<std::string>& texts, size_t begin,
                                    size_t end) {
  std::vector<TokenSequence> seqs;
  for (size_t i = begin; i < end; ++i) seqs.push_back(ckpt.tokenizer.Encode(texts[i], ckpt.config.max_text_len));
  return seqs;
}

}  // namespace

Mat StackPatches(const std::vector<const Image*>& images, const ModelConfig& cfg) {
  const int np = cfg.n_patches();
  Mat out(static_cast<Eigen::Index>(images.size()) * np, cfg.patch_dim());
  for (size_t i = 0; i < images.size(); ++i) out.middleRows(static_cast<Eigen::Index>(i) * np, np) = ImagePatches(*images[i], cfg);
  return out;
}

std::pair<SeqEmbedding, Vec> EncodeText(const Checkpoint& ckpt, const TokenSequence& tokens) {
  ValidateTokens(tokens, ckpt.config.text_vocab_size, ckpt.config.max_text_len);
  const TokenBatch batch = TokenBatch::From({tokens});
  TextEncoder::Output out = ckpt.online.text.Forward(batch, nullptr);
  return {SeqEmbedding{out.seq.topRows(batch.lengths[0]), Modality::kText}, out.pooled.row(0)};
}

SeqEmbedding Encode(const Checkpoint& ckpt, const Image& image, const TokenSequence& tokens) {
  ValidateTokens(tokens, ckpt.config.text_vocab_size, ckpt.config.max_text_len);
  const Mat patches = ImagePatches(image, ckpt.config);
  const TokenBatch batch = TokenBatch::From({tokens});
  const TextEncoder::Output text = ckpt.online.text.Forward(batch, nullptr);
  Mat z = ckpt.online.visual.Forward(patches, 1, text.seq, batch.len, batch.lengths, ckpt.config.cross_attention,
                                     nullptr);
  return SeqEmbedding{std::move(z), Modality::kVisual};
}

Vec Predict(const Checkpoint& ckpt, const SeqEmbedding& z, const Vec& text_pooled) {
  Require(z.values.cols() == ckpt.config.d_model && text_pooled.size() == ckpt.config.d_model,
          ErrorCode::kDimensionMismatch, "predictor inputs must be d_model wide");
  const Mat pooled = text_pooled;
  return ckpt.online.predictor.Forward(z.values, 1, pooled, nullptr).row(0);
}

Vec EmbedQuery(const Checkpoint& ckpt, const Image& image, const std::string& text) {
  return EmbedQueries(ckpt, {&image}, {text}).row(0);
}

Vec EmbedTarget(const Checkpoint& ckpt, const Image& image, bool use_ema) {
  return EmbedTargets(ckpt, {&image}, use_ema).row(0);
}

Mat EmbedQueries(const Checkpoint& ckpt, const std::vector<const Image*>& images,
                 const std::vector<std::string>& texts, Mat* text_pooled) {
  Require(images.size() == texts.size(), ErrorCode::kDimensionMismatch, "one text per image is required");
  const int d = ckpt.config.d_model;
  Mat out(static_cast<Eigen::Index>(images.size()), d);
  if (text_pooled) text_pooled->resize(static_cast<Eigen::Index>(images.size()), d);
  for (size_t begin = 0; begin < images.size(); begin += kChunk) {
    const size_t end = std::min(images.size(), begin + kChunk);
    const std::vector<const Image*> chunk(images.begin() + begin, images.begin() + end);
    const TokenBatch tokens = TokenBatch::From(Tokenize(ckpt, texts, begin, end));
    Mat pooled;
    out.middleRows(begin, end - begin) =
        EmbedBatch(ckpt.config, ckpt.online.text, ckpt.online.visual, ckpt.online.predictor,
                   StackPatches(chunk, ckpt.config), tokens, nullptr, &pooled);
    if (text_pooled) text_pooled->middleRows(begin, end - begin) = pooled;
  }
  return out;
}

Mat EmbedTargets(const Checkpoint& ckpt, const std::vector<const Image*>& images, bool use_ema) {
  const TextEncoder& text = use_ema ? ckpt.target.text : ckpt.online.text;
  const VisualEncoder& visual = use_ema ? ckpt.target.visual : ckpt.online.visual;
  const Predictor& predictor = use_ema ? ckpt.target.predictor : ckpt.online.predictor;
  Mat out(static_cast<Eigen::Index>(images.size()), ckpt.config.d_model);
  for (size_t begin = 0; begin < images.size(); begin += kChunk) {
    const size_t end = std::min(images.size(), begin + kChunk);
    const std::vector<const Image*> chunk(images.begin() + begin, images.begin() + end);
    const TokenBatch tokens = TokenBatch::Repeat(Tokenizer::NullText(), static_cast<int>(chunk.size()));
    out.middleRows(begin, end - begin) = EmbedBatch(ckpt.config, text, visual, predictor,
                                                    StackPatches(chunk, ckpt.config), tokens, nullptr);
  }
  return out;
}

Mat EncodeTexts(const Checkpoint& ckpt, const std::vector<std::string>& texts) {
  Mat out(static_cast<Eigen::Index>(texts.size()), ckpt.config.d_model);
  for (size_t begin = 0; begin < texts.size(); begin += kChunk) {
    const size_t end = std::min(texts.size(), begin + kChunk);
    const TokenBatch tokens = TokenBatch::From(Tokenize(ckpt, texts, begin, end));
    out.middleRows(begin, end - begin) = ckpt.online.text.Forward(tokens, nullptr).pooled;
  }
  return out;
}

}  // namespace zscir
