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

#ifndef ZSCIR_MODEL_CONFIG_HPP_
#define ZSCIR_MODEL_CONFIG_HPP_

#include <cstdint>

#include <json.hpp>

namespace zscir {

struct ModelConfig {
  int image_size = 32;
  int channels = 3;
  int patch_size = 8;
  int d_model = 64;
  int n_heads = 4;
  int n_blocks = 4;
  int mlp_ratio = 4;
  int text_vocab_size = 0;  // filled from the tokenizer vocabulary
  int max_text_len = 16;
  int text_layers = 2;
  int null_token_id = 0;
  bool cross_attention = true;  // false: the "w/o cross-attention" ablation
  double ema_momentum = 0.996;
  double temperature_init = 10.0;
  double lambda_init = 0.5;
  uint64_t seed = 0;

  int patches_per_side() const { return image_size / patch_size; }
  int n_patches() const { return patches_per_side() * patches_per_side(); }
  int patch_dim() const { return patch_size * patch_size * channels; }

  // Throws InvalidConfig when an invariant does not hold.
  void Validate() const;
};

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

}  // namespace zscir

#endif  // ZSCIR_MODEL_CONFIG_HPP_
