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

#include "zscir/pipeline/prompt.hpp"

#include "zscir/common/error.hpp"
#include "zscir/pipeline/image_record.hpp"

namespace zscir {

std::string RenderReformulationPrompt(std::string_view caption_a, std::string_view caption_b) {
  Require(WordCount(caption_a) > 0 && WordCount(caption_b) > 0, ErrorCode::kEmptyCaption,
          "reformulation prompt needs two non-empty captions");
  std::string prompt =
      "You have two captions for two images, image A and image B, you are supposed to write a "
      "reformulation text describing changing from image A to image B.\n";
  prompt += "caption A: ";
  prompt += caption_a;
  prompt += "\ncaption B: ";
  prompt += caption_b;
  prompt +=
      "\nanswer should be concise and within 12 words, only contain normal words, do not use "
      "special characters.\nDifference:";
  return prompt;
}

}  // namespace zscir
