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

#ifndef ZSCIR_COMMON_IO_HPP_
#define ZSCIR_COMMON_IO_HPP_

#include <filesystem>
#include <string>
#include <string_view>

namespace zscir {

std::string ReadFile(const std::filesystem::path& path);

// Writes to a sibling temp file and renames it over `path`, so readers never
// observe a partial file.
void WriteFileAtomic(const std::filesystem::path& path, std::string_view contents);

std::string Sha256Hex(std::string_view bytes);
std::string Sha256File(const std::filesystem::path& path);

std::string Base64Encode(std::string_view bytes);

}  // namespace zscir

#endif  // ZSCIR_COMMON_IO_HPP_
