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

#ifndef ZSCIR_PIPELINE_PROMPT_HPP_
#define ZSCIR_PIPELINE_PROMPT_HPP_

#include <string>
#include <string_view>

namespace zscir {

// Instruction sent with each image to an external captioning model.
inline constexpr std::string_view kCaptionPrompt =
    "Describe this image in detail, covering object, color, style, and setting.";

// Fills the two caption slots of the reformulation template. Throws
// EmptyCaption when either caption is blank.
std::string RenderReformulationPrompt(std::string_view caption_a, std::string_view caption_b);

}  // namespace zscir

#endif  // ZSCIR_PIPELINE_PROMPT_HPP_
