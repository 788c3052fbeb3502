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

#include "zscir/model/config.hpp"

#include <string>

#include "zscir/common/error.hpp"

namespace zscir {

void ModelConfig::Validate() const {
  auto check = [](bool ok, const std::string& what) { Require(ok, ErrorCode::kInvalidConfig, what); };
  check(image_size > 0 && patch_size > 0 && channels > 0, "image_size, patch_size and channels must be positive");
  check(image_size % patch_size == 0, "patch_size must divide image_size");
  check(d_model > 0 && n_heads > 0 && d_model % n_heads == 0, "d_model must be divisible by n_heads");
  check(n_blocks >= 0 && text_layers >= 0 && mlp_ratio > 0, "layer counts must be non-negative");
  check(max_text_len >= 2, "max_text_len must leave room for a word and the end token");
  check(text_vocab_size > 0, "text_vocab_size is unset");
  check(null_token_id >= 0 && null_token_id < text_vocab_size, "null_token_id must be inside the vocabulary");
  check(ema_momentum >= 0.0 && ema_momentum <= 1.0, "ema_momentum must lie in [0, 1]");
  check(temperature_init > 0.0, "temperature_init must be positive");
  check(lambda_init >= 0.0 && lambda_init <= 1.0, "lambda_init must lie in [0, 1]");
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{{"image_size", c.image_size},
                     {"channels", c.channels},
                     {"patch_size", c.patch_size},
                     {"d_model", c.d_model},
                     {"n_heads", c.n_heads},
                     {"n_blocks", c.n_blocks},
                     {"mlp_ratio", c.mlp_ratio},
                     {"text_vocab_size", c.text_vocab_size},
                     {"max_text_len", c.max_text_len},
                     {"text_layers", c.text_layers},
                     {"null_token_id", c.null_token_id},
                     {"cross_attention", c.cross_attention},
                     {"ema_momentum", c.ema_momentum},
                     {"temperature_init", c.temperature_init},
                     {"lambda_init", c.lambda_init},
                     {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  j.at("image_size").get_to(c.image_size);
  j.at("channels").get_to(c.channels);
  j.at("patch_size").get_to(c.patch_size);
  j.at("d_model").get_to(c.d_model);
  j.at("n_heads").get_to(c.n_heads);
  j.at("n_blocks").get_to(c.n_blocks);
  j.at("mlp_ratio").get_to(c.mlp_ratio);
  j.at("text_vocab_size").get_to(c.text_vocab_size);
  j.at("max_text_len").get_to(c.max_text_len);
  j.at("text_layers").get_to(c.text_layers);
  j.at("null_token_id").get_to(c.null_token_id);
  j.at("cross_attention").get_to(c.cross_attention);
  j.at("ema_momentum").get_to(c.ema_momentum);
  j.at("temperature_init").get_to(c.temperature_init);
  j.at("lambda_init").get_to(c.lambda_init);
  j.at("seed").get_to(c.seed);
}

}  // namespace zscir
