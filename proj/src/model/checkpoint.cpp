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

#include "zscir/model/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <map>

#include <json.hpp>

#include "zscir/common/error.hpp"
#include "zscir/common/io.hpp"

namespace zscir {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'Z', 'S', 'C', 'I', 'R', 'C', 'K', '1'};

// Every persisted array, online first, then target, then the two scalars.
std::vector<std::pair<std::string, Mat*>> ArchiveEntries(Checkpoint& ckpt, Mat& tau, Mat& lambda) {
  std::vector<std::pair<std::string, Mat*>> entries;
  for (auto& [name, m] : ckpt.online.Params()) entries.emplace_back("online/" + name, m);
  for (auto& [name, m] : ckpt.target.Params()) entries.emplace_back("target/" + name, m);
  entries.emplace_back("scalar/tau", &tau);
  entries.emplace_back("scalar/lambda", &lambda);
  return entries;
}

}  // namespace

Checkpoint Checkpoint::Initialize(const ModelConfig& config, const Tokenizer& tokenizer) {
  Checkpoint ckpt;
  ckpt.config = config;
  ckpt.config.text_vocab_size = tokenizer.vocab_size();
  ckpt.config.null_token_id = Tokenizer::kNullId;
  ckpt.config.Validate();
  ckpt.tokenizer = tokenizer;
  Rng rng(config.seed);
  ckpt.online.Init(ckpt.config, rng);
  ckpt.SyncTarget();
  ckpt.tau = config.temperature_init;
  ckpt.lambda = config.lambda_init;
  ckpt.step = 0;
  return ckpt;
}

void Checkpoint::SyncTarget() {
  target.text = online.text;
  target.visual = online.visual;
  target.predictor = online.predictor;
}

void SaveCheckpoint(const Checkpoint& ckpt_in, const std::filesystem::path& path) {
  Checkpoint& ckpt = const_cast<Checkpoint&>(ckpt_in);  // entries are only read
  Mat tau = Mat::Constant(1, 1, ckpt.tau);
  Mat lambda = Mat::Constant(1, 1, ckpt.lambda);
  const auto entries = ArchiveEntries(ckpt, tau, lambda);

  json header;
  header["format_version"] = kCheckpointFormatVersion;
  header["config"] = ckpt.config;
  header["vocabulary"] = ckpt.tokenizer.vocabulary();
  header["step"] = ckpt.step;
  header["tau"] = ckpt.tau;
  header["lambda"] = ckpt.lambda;
  json table = json::array();
  for (const auto& [name, m] : entries) table.push_back({{"name", name}, {"rows", m->rows()}, {"cols", m->cols()}});
  header["arrays"] = table;
  const std::string header_text = header.dump();

  std::string out(kMagic, sizeof(kMagic));
  const uint64_t header_len = header_text.size();
  out.append(reinterpret_cast<const char*>(&header_len), sizeof(header_len));
  out += header_text;
  for (const auto& [name, m] : entries)
    out.append(reinterpret_cast<const char*>(m->data()), sizeof(double) * static_cast<size_t>(m->size()));
  WriteFileAtomic(path, out);
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  const std::string bytes = ReadFile(path);
  Require(bytes.size() >= 16 && std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) == 0, ErrorCode::kParse,
          path.string() + " is not a checkpoint");
  uint64_t header_len = 0;
  std::memcpy(&header_len, bytes.data() + 8, sizeof(header_len));
  Require(16 + header_len <= bytes.size(), ErrorCode::kParse, "truncated checkpoint header");
  const json header = json::parse(bytes.substr(16, header_len));
  Require(header.at("format_version").get<int>() == kCheckpointFormatVersion, ErrorCode::kParse,
          "unsupported checkpoint format version");

  auto vocab = header.at("vocabulary").get<std::vector<std::string>>();
  Require(vocab.size() >= 3, ErrorCode::kParse, "checkpoint vocabulary lacks reserved tokens");
  Tokenizer tokenizer(std::vector<std::string>(vocab.begin() + 3, vocab.end()));
  ModelConfig config = header.at("config").get<ModelConfig>();
  Checkpoint ckpt = Checkpoint::Initialize(config, tokenizer);
  ckpt.step = header.at("step").get<int64_t>();

  Mat tau(1, 1), lambda(1, 1);
  const auto entries = ArchiveEntries(ckpt, tau, lambda);
  const json& table = header.at("arrays");
  Require(table.size() == entries.size(), ErrorCode::kShapeMismatch, "checkpoint array count does not match config");
  size_t offset = 16 + header_len;
  for (size_t i = 0; i < entries.size(); ++i) {
    const auto& [name, m] = entries[i];
    Require(table[i].at("name").get<std::string>() == name && table[i].at("rows").get<Eigen::Index>() == m->rows() &&
                table[i].at("cols").get<Eigen::Index>() == m->cols(),
            ErrorCode::kShapeMismatch, "checkpoint array " + name + " does not match the config");
    const size_t n = sizeof(double) * static_cast<size_t>(m->size());
    Require(offset + n <= bytes.size(), ErrorCode::kParse, "truncated checkpoint data");
    std::memcpy(m->data(), bytes.data() + offset, n);
    offset += n;
  }
  ckpt.tau = tau(0, 0);
  ckpt.lambda = lambda(0, 0);
  return ckpt;
}

std::string BackboneHash(const Checkpoint& ckpt_in) {
  Checkpoint& ckpt = const_cast<Checkpoint&>(ckpt_in);
  std::string buffer;
  auto append = [&](const std::string& name, const Mat& m) {
    buffer += name;
    buffer += ':' + std::to_string(m.rows()) + 'x' + std::to_string(m.cols()) + ';';
    buffer.append(reinterpret_cast<const char*>(m.data()), sizeof(double) * static_cast<size_t>(m.size()));
  };
  for (auto& [name, m] : ckpt.online.Params()) append("online/" + name, *m);
  for (auto& [name, m] : ckpt.target.Params()) append("target/" + name, *m);
  return Sha256Hex(buffer);
}

void EmaUpdate(const ConstParamList& online, const ParamList& target, double m) {
  Require(m >= 0.0 && m <= 1.0, ErrorCode::kInvalidConfig, "EMA momentum must lie in [0, 1]");
  std::map<std::string, const Mat*> by_name;
  for (const auto& [name, p] : online) by_name.emplace(name, p);
  for (const auto& [name, t] : target) {
    auto it = by_name.find(name);
    Require(it != by_name.end(), ErrorCode::kShapeMismatch, "online parameters lack " + name);
    Require(it->second->rows() == t->rows() && it->second->cols() == t->cols(), ErrorCode::kShapeMismatch,
            "shape mismatch for " + name);
  }
  for (const auto& [name, t] : target) {
    const Mat& o = *by_name.at(name);
    *t = m * (*t) + (1.0 - m) * o;
  }
}

void EmaUpdate(Checkpoint& ckpt, double m) {
  const Model& online = ckpt.online;
  EmaUpdate(online.Params(), ckpt.target.Params(), m);
}

}  // namespace zscir
