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


#include "zscir/eval/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "zscir/common/error.hpp"
#include "zscir/common/image.hpp"
#include "zscir/common/io.hpp"
#include "zscir/train/trainer.hpp"

namespace zscir {

namespace {

std::string RecallName(int k) { return "R@" + std::to_string(k); }
std::string SubsetName(int k) { return "Rs@" + std::to_string(k); }

nlohmann::ordered_json PercentMap(const std::map<std::string, double>& m) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [k, v] : m) j[k] = Percent(v);
  return j;
}

}  // namespace

void EvalProtocol::Validate() const {
  Require(!ks.empty() || !subset_ks.empty(), ErrorCode::kInvalidConfig, "no recall cut-offs configured");
  for (int k : ks) Require(k >= 1, ErrorCode::kInvalidConfig, "recall cut-offs must be >= 1");
  for (int k : subset_ks) Require(k >= 1, ErrorCode::kInvalidConfig, "subset cut-offs must be >= 1");
  Require(!modes.empty(), ErrorCode::kInvalidConfig, "no query modes configured");
  Require(keep_ranked >= 0, ErrorCode::kInvalidConfig, "keep_ranked must be >= 0");
  std::set<std::string> known;
  for (int k : ks) known.insert(RecallName(k));
  for (int k : subset_ks) known.insert(SubsetName(k));
  for (const NamedAverage& a : averages) {
    Require(!a.metrics.empty(), ErrorCode::kInvalidConfig, "average " + a.name + " has no constituents");
    for (const std::string& m : a.metrics) {
      Require(known.count(m) > 0, ErrorCode::kInvalidConfig, "average " + a.name + " uses unconfigured metric " + m);
    }
  }
}

void to_json(nlohmann::json& j, const EvalProtocol& p) {
  std::vector<std::string> modes;
  for (QueryMode m : p.modes) modes.emplace_back(QueryModeName(m));
  nlohmann::json averages = nlohmann::json::object();
  for (const NamedAverage& a : p.averages) averages[a.name] = a.metrics;
  j = {{"ks", p.ks},
       {"subset_ks", p.subset_ks},
       {"averages", averages},
       {"modes", modes},
       {"index_split", p.index_split == IndexSplit::kIndex ? "index" : "all"},
       {"index_mode", IndexModeName(p.index_mode)},
       {"include_reference", p.include_reference},
       {"keep_ranked", p.keep_ranked}};
}

bool ModeReport::SameResults(const ModeReport& o) const {
  return metrics == o.metrics && averages == o.averages && per_class == o.per_class && class_mean == o.class_mean &&
         ranked == o.ranked;
}

const ModeReport& EvalReport::mode(std::string_view name) const {
  for (const ModeReport& m : modes) {
    if (m.mode == name) return m;
  }
  Fail(ErrorCode::kMissingRankedLists, "report has no mode " + std::string(name));
}

double Percent(double fraction) { return std::round(fraction * 10000.0) / 100.0; }

nlohmann::ordered_json EvalReport::ToJson() const {
  nlohmann::ordered_json j;
  j["config_hash"] = config_hash;
  j["checkpoint_hash"] = checkpoint_hash;
  j["lambda"] = lambda;
  j["n_cases"] = cases.size();
  nlohmann::ordered_json mj = nlohmann::ordered_json::object();
  for (const ModeReport& m : modes) {
    nlohmann::ordered_json r;
    r["metrics"] = m.metrics;
    r["percent"] = PercentMap(m.metrics);
    nlohmann::ordered_json avg = nlohmann::ordered_json::object();
    nlohmann::ordered_json avg_pct = nlohmann::ordered_json::object();
    for (const auto& [name, v] : m.averages) {
      avg[name] = v;
      avg_pct[name] = Percent(v);
    }
    r["averages"] = avg;
    r["averages_percent"] = avg_pct;
    nlohmann::ordered_json pc = nlohmann::ordered_json::object();
    nlohmann::ordered_json pc_pct = nlohmann::ordered_json::object();
    for (const auto& [cls, metrics] : m.per_class) {
      pc[cls] = metrics;
      pc_pct[cls] = PercentMap(metrics);
    }
    r["per_class"] = pc;
    r["per_class_percent"] = pc_pct;
    r["class_mean"] = m.class_mean;
    r["class_mean_percent"] = PercentMap(m.class_mean);
    if (!m.ranked.empty()) {
      nlohmann::ordered_json lists = nlohmann::ordered_json::array();
      for (size_t i = 0; i < m.ranked.size(); ++i) {
        nlohmann::ordered_json entry;
        entry["ref_id"] = cases[i].ref_id;
        entry["reformulation"] = cases[i].reformulation;
        entry["gt_target_id"] = cases[i].gt_target_id;
        nlohmann::ordered_json cands = nlohmann::ordered_json::array();
        for (const ScoredId& s : m.ranked[i]) cands.push_back({{"id", s.id}, {"score", s.score}});
        entry["ranked"] = cands;
        lists.push_back(entry);
      }
      r["ranked"] = lists;
    }
    mj[m.mode] = r;
  }
  j["modes"] = mj;
  return j;
}

EvalReport ParseReport(const nlohmann::ordered_json& j) {
  try {
    EvalReport report;
    report.config_hash = j.at("config_hash").get<std::string>();
    report.checkpoint_hash = j.at("checkpoint_hash").get<std::string>();
    report.lambda = j.at("lambda").get<double>();
    const size_t n = j.at("n_cases").get<size_t>();
    bool have_cases = false;
    for (const auto& [name, r] : j.at("modes").items()) {
      ModeReport m;
      m.mode = name;
      m.metrics = r.at("metrics").get<std::map<std::string, double>>();
      for (const auto& [avg, v] : r.at("averages").items()) m.averages.emplace_back(avg, v.get<double>());
      m.per_class = r.at("per_class").get<std::map<std::string, std::map<std::string, double>>>();
      m.class_mean = r.at("class_mean").get<std::map<std::string, double>>();
      if (r.contains("ranked")) {
        const auto& lists = r.at("ranked");
        Require(lists.size() == n, ErrorCode::kParse, "ranked lists do not match n_cases");
        for (const auto& entry : lists) {
          Ranking ranking;
          for (const auto& c : entry.at("ranked")) ranking.push_back({c.at("id"), c.at("score")});
          m.ranked.push_back(std::move(ranking));
          if (!have_cases) {
            report.cases.push_back({entry.at("ref_id"), entry.at("reformulation"), entry.at("gt_target_id"), {}});
          }
        }
        have_cases = true;
      }
      report.modes.push_back(std::move(m));
    }
    return report;
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kParse, std::string("malformed report: ") + e.what());
  }
}

EvalReport ReadReport(const std::filesystem::path& path) {
  try {
    return ParseReport(nlohmann::ordered_json::parse(ReadFile(path)));
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

ModeReport ScoreMode(std::string name, const Mat& queries, const std::vector<QueryCase>& cases,
                     const Collection& collection, const EmbeddingIndex& index, const EvalProtocol& protocol) {
  Require(queries.rows() == static_cast<Eigen::Index>(cases.size()), ErrorCode::kMissingRanking,
          "one query row per case is required");
  for (const QueryCase& c : cases) {
    Require(index.row_of(c.gt_target_id).has_value(), ErrorCode::kDanglingId,
            "ground truth " + c.gt_target_id + " is not in the index");
  }
  ModeReport report;
  report.mode = std::move(name);
  size_t depth = static_cast<size_t>(protocol.keep_ranked);
  for (int k : protocol.ks) depth = std::max(depth, static_cast<size_t>(k));
  std::vector<Ranking> rankings;
  rankings.reserve(cases.size());
  for (size_t i = 0; i < cases.size(); ++i) {
    const std::optional<std::string> exclude =
        protocol.include_reference ? std::nullopt : std::optional<std::string>(cases[i].ref_id);
    rankings.push_back(Retrieve(queries.row(static_cast<Eigen::Index>(i)), index, std::max<size_t>(depth, 1), exclude));
  }

  // Metrics over an arbitrary subset of cases, used for the totals and the
  // per-class breakdown.
  auto score = [&](const std::vector<size_t>& sel) {
    std::vector<QueryCase> cs;
    std::vector<Ranking> rs;
    Mat qs(static_cast<Eigen::Index>(sel.size()), queries.cols());
    for (size_t j = 0; j < sel.size(); ++j) {
      cs.push_back(cases[sel[j]]);
      rs.push_back(rankings[sel[j]]);
      qs.row(static_cast<Eigen::Index>(j)) = queries.row(static_cast<Eigen::Index>(sel[j]));
    }
    std::map<std::string, double> m;
    for (int k : protocol.ks) m[RecallName(k)] = RecallAtK(cs, rs, static_cast<size_t>(k));
    for (int k : protocol.subset_ks) m[SubsetName(k)] = RecallSubsetAtK(cs, qs, index, static_cast<size_t>(k));
    return m;
  };

  std::vector<size_t> all(cases.size());
  for (size_t i = 0; i < all.size(); ++i) all[i] = i;
  report.metrics = score(all);
  for (const NamedAverage& a : protocol.averages) {
    double sum = 0.0;
    for (const std::string& m : a.metrics) sum += report.metrics.at(m);
    report.averages.emplace_back(a.name, sum / static_cast<double>(a.metrics.size()));
  }

  std::map<std::string, std::vector<size_t>> by_class;
  for (size_t i = 0; i < cases.size(); ++i) {
    const auto& meta = collection.at(cases[i].gt_target_id).meta_class;
    if (meta) by_class[*meta].push_back(i);
  }
  for (const auto& [cls, sel] : by_class) report.per_class[cls] = score(sel);
  if (!report.per_class.empty()) {
    for (const auto& [metric, unused] : report.metrics) {
      double sum = 0.0;
      for (const auto& [cls, m] : report.per_class) sum += m.at(metric);
      report.class_mean[metric] = sum / static_cast<double>(report.per_class.size());
    }
  }

  if (protocol.keep_ranked > 0) {
    for (Ranking& r : rankings) {
      if (r.size() > static_cast<size_t>(protocol.keep_ranked)) r.resize(static_cast<size_t>(protocol.keep_ranked));
    }
    report.ranked = std::move(rankings);
  }
  return report;
}

EvalReport Evaluate(const Checkpoint& ckpt, const Collection& collection, const std::vector<QueryCase>& cases,
                    const EvalProtocol& protocol) {
  protocol.Validate();
  Require(!cases.empty(), ErrorCode::kInvalidConfig, "evaluation needs at least one case");
  std::vector<const ImageRecord*> gallery;
  if (protocol.index_split == IndexSplit::kIndex) {
    gallery = collection.WithSplit(Split::kIndex);
  } else {
    for (const ImageRecord& r : collection.images()) gallery.push_back(&r);
  }
  const EmbeddingIndex index = BuildIndex(gallery, ckpt, protocol.index_mode);

  std::vector<const Image*> images;
  std::vector<std::string> texts;
  for (const QueryCase& c : cases) {
    images.push_back(&collection.at(c.ref_id).pixels);
    texts.push_back(c.reformulation);
  }
  // Shared forward passes so the fused endpoints coincide exactly with the
  // query and text-only rows.
  Mat pooled;
  const Mat queries = EmbedQueries(ckpt, images, texts, &pooled);
  Mat image_rows;
  auto image_only = [&]() -> const Mat& {
    if (image_rows.size() == 0) image_rows = EmbedTargets(ckpt, images, false);
    return image_rows;
  };

  EvalReport report;
  report.checkpoint_hash = BackboneHash(ckpt);
  report.lambda = ckpt.lambda;
  report.cases = cases;
  for (QueryMode mode : protocol.modes) {
    Mat rows;
    switch (mode) {
      case QueryMode::kQuery: rows = queries; break;
      case QueryMode::kFused: rows = FuseRows(queries, pooled, ckpt.lambda); break;
      case QueryMode::kImageOnly: rows = image_only(); break;
      case QueryMode::kTextOnly: rows = pooled; break;
      case QueryMode::kSum: {
        const Mat& img = image_only();
        rows = img.array().colwise() / img.rowwise().norm().array() +
               pooled.array().colwise() / pooled.rowwise().norm().array();
        break;
      }
    }
    report.modes.push_back(ScoreMode(std::string(QueryModeName(mode)), rows, cases, collection, index, protocol));
  }
  return report;
}

void WriteReport(const std::filesystem::path& path, const EvalReport& report) {
  WriteFileAtomic(path, report.ToJson().dump(2) + "\n");
}

namespace {

std::string Escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string RenderGallery(const EvalReport& report, const Collection& collection, std::string_view mode,
                          int top_k) {
  Require(top_k >= 1, ErrorCode::kInvalidConfig, "top_k must be at least 1");
  const ModeReport& m = report.mode(mode);
  Require(!m.ranked.empty() && m.ranked.size() == report.cases.size(), ErrorCode::kMissingRankedLists,
          "mode " + std::string(mode) + " carries no ranked lists");
  std::map<std::string, std::string> thumbs;
  auto thumb = [&](const std::string& id) -> const std::string& {
    auto it = thumbs.find(id);
    if (it == thumbs.end()) {
      const Image& px = collection.at(id).pixels;
      const int factor = std::max(1, 64 / std::max(1, px.width));
      it = thumbs.emplace(id, "data:image/png;base64," + Base64Encode(EncodePng(Upscale(px, factor)))).first;
    }
    return it->second;
  };

  std::ostringstream out;
  out << "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>retrieval gallery: " << Escape(mode)
      << "</title>\n<style>\n"
      << "table{border-collapse:collapse;font-family:sans-serif;font-size:11px}\n"
      << "td{padding:4px;text-align:center;vertical-align:top;border:1px solid #ddd}\n"
      << "td.ref{background:#f4f4f4;max-width:180px}\n"
      << "td.gt{outline:3px solid #2a2;background:#e8f8e8}\n"
      << ".miss{color:#c22;font-weight:bold}\n"
      << "img{width:64px;height:64px;image-rendering:pixelated;display:block;margin:auto}\n"
      << "</style>\n</head>\n<body>\n";
  out << "<h1>mode " << Escape(mode) << ", top " << top_k << "</h1>\n";
  out << "<p>checkpoint " << Escape(report.checkpoint_hash) << "</p>\n<table>\n";
  for (size_t i = 0; i < report.cases.size(); ++i) {
    const QueryCase& c = report.cases[i];
    const Ranking& r = m.ranked[i];
    const size_t n = std::min(static_cast<size_t>(top_k), r.size());
    bool found = false;
    for (size_t j = 0; j < n; ++j) found = found || r[j].id == c.gt_target_id;
    out << "<tr class=\"case\">\n<td class=\"ref\"><img src=\"" << thumb(c.ref_id) << "\" alt=\"" << Escape(c.ref_id)
        << "\"><div>" << Escape(c.ref_id) << "</div><div>" << Escape(c.reformulation) << "</div><div>gt "
        << Escape(c.gt_target_id) << "</div>";
    if (!found) out << "<div class=\"miss\">gt not retrieved</div>";
    out << "</td>\n";
    for (size_t j = 0; j < n; ++j) {
      char score[32];
      std::snprintf(score, sizeof(score), "%.4f", r[j].score);
      const bool gt = r[j].id == c.gt_target_id;
      out << "<td class=\"" << (gt ? "cand gt" : "cand") << "\"><img src=\"" << thumb(r[j].id) << "\" alt=\""
          << Escape(r[j].id) << "\"><div>" << (j + 1) << ". " << Escape(r[j].id) << "</div><div>" << score
          << "</div></td>\n";
    }
    out << "</tr>\n";
  }
  out << "</table>\n</body>\n</html>\n";
  return out.str();
}

void ExportGallery(const EvalReport& report, const Collection& collection, std::string_view mode, int top_k,
                   const std::filesystem::path& path) {
  WriteFileAtomic(path, RenderGallery(report, collection, mode, top_k));
}

}  // namespace zscir
