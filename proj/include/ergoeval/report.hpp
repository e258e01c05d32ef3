/* Copyright 2026 The ergoeval Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Plain-text and tab-separated rendering of comparison reports, plus their
// JSON form so a report can be rendered again later.

#pragma once

#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ergoeval/evaluation.hpp"
#include "json.hpp"

namespace ergoeval {

/// Fixed-point text rounded half away from zero on the decimal expansion,
/// so 0.125 gives "0.13" regardless of its binary representation.
inline std::string format_fixed(double value, int decimals) {
  if (!std::isfinite(value)) return std::isnan(value) ? "nan" : (value > 0 ? "inf" : "-inf");
  char buf[64];
  // 12 extra digits are well inside double precision for report magnitudes.
  std::snprintf(buf, sizeof buf, "%.*f", decimals + 12, std::abs(value));
  std::string digits(buf);
  const auto dot = digits.find('.');
  std::string kept = digits.substr(0, dot + 1 + static_cast<std::size_t>(decimals));
  const bool round_up = digits[dot + 1 + static_cast<std::size_t>(decimals)] >= '5';
  if (round_up) {
    int i = static_cast<int>(kept.size()) - 1;
    for (; i >= 0; --i) {
      if (kept[static_cast<std::size_t>(i)] == '.') continue;
      if (kept[static_cast<std::size_t>(i)] == '9') {
        kept[static_cast<std::size_t>(i)] = '0';
      } else {
        ++kept[static_cast<std::size_t>(i)];
        break;
      }
    }
    if (i < 0) kept.insert(kept.begin(), '1');
  }
  if (decimals == 0) kept.pop_back();
  const bool zero = kept.find_first_not_of("0.") == std::string::npos;
  return (value < 0 && !zero ? "-" : "") + kept;
}

inline std::string format_percent(double value, int decimals = 2) {
  return format_fixed(value, decimals) + "%";
}

enum class ReportFormat { kText, kTsv };

namespace detail {

using Table = std::vector<std::vector<std::string>>;

inline void render_table(std::string& out, const std::string& title, const Table& rows,
                         ReportFormat format) {
  if (format == ReportFormat::kTsv) {
    out += "# " + title + "\n";
    for (const auto& row : rows) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (c) out += '\t';
        out += row[c];
      }
      out += '\n';
    }
    out += '\n';
    return;
  }
  std::vector<std::size_t> width;
  for (const auto& row : rows) {
    width.resize(std::max(width.size(), row.size()), 0);
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  out += title + "\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::string line;
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      if (c) line += "  ";
      line += rows[r][c];
      if (c + 1 < rows[r].size()) line.append(width[c] - rows[r][c].size(), ' ');
    }
    out += line + "\n";
    if (r == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w;
      out += std::string(total + 2 * (width.size() - 1), '-') + "\n";
    }
  }
  out += "\n";
}

}  // namespace detail

inline std::string render_report(const ComparisonReport& rep, ReportFormat format) {
  std::string out;
  if (!rep.identification.empty()) {
    detail::Table t{{"Metric"}};
    for (const auto& m : rep.identification) t[0].push_back(m.model_id);
    auto row = [&](const char* label, auto member) {
      std::vector<std::string> r{label};
      for (const auto& m : rep.identification) {
        const auto& v = m.*member;
        r.push_back(v ? format_percent(*v) : "N/A");
      }
      t.push_back(std::move(r));
    };
    row("perplexity", &ModelIdentification::perplexity_pct);
    row("VQA", &ModelIdentification::vqa_pct);
    detail::render_table(out, "Correct risk identification", t, format);
  }

  detail::Table diff{{"Metric", "Average of difference", "Percentage of data with improvement",
                      "Average improvement"}};
  for (const auto& c : rep.metrics) {
    diff.push_back({std::string(metric_label(c.metric)), format_fixed(c.avg_difference, 2),
                    format_percent(c.pct_improved),
                    c.avg_improvement_pct ? format_percent(*c.avg_improvement_pct) : "N/A"});
  }
  detail::render_table(out,
                       "Metric differences (" + rep.finetuned_label + " - " + rep.general_label +
                           ", n=" + std::to_string(rep.n) + ")",
                       diff, format);

  detail::Table means{{"Metric", "Average of " + rep.general_label,
                       "Average of " + rep.finetuned_label}};
  for (const auto& c : rep.metrics) {
    means.push_back({std::string(metric_label(c.metric)), format_fixed(c.mean_general, 2),
                     format_fixed(c.mean_finetuned, 2)});
  }
  detail::render_table(out, "Average metric scores", means, format);

  if (rep.find(MetricId::kCosineSim) != nullptr) {
    out += format == ReportFormat::kTsv ? "# " : "";
    out += "Note: cosine similarity spans [-1, 1]; its improvement percentage uses an upper "
           "bound of 1 and is of limited informative value.\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

inline nlohmann::ordered_json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

inline std::optional<double> read_optional(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<double>();
}

}  // namespace detail

inline std::string serialize_report(const ComparisonReport& rep) {
  nlohmann::ordered_json j;
  j["format"] = "ergoeval.comparison_report";
  j["finetuned_label"] = rep.finetuned_label;
  j["general_label"] = rep.general_label;
  j["n"] = rep.n;
  auto& metrics = j["metrics"] = nlohmann::ordered_json::array();
  for (const auto& c : rep.metrics) {
    nlohmann::ordered_json m;
    m["metric"] = std::string(metric_key(c.metric));
    m["n"] = c.n;
    m["mean_finetuned"] = c.mean_finetuned;
    m["mean_general"] = c.mean_general;
    m["avg_difference"] = c.avg_difference;
    m["pct_improved"] = c.pct_improved;
    m["pct_tied"] = c.pct_tied;
    m["pct_worsened"] = c.pct_worsened;
    m["avg_improvement_pct"] = detail::optional_number(c.avg_improvement_pct);
    metrics.push_back(std::move(m));
  }
  auto& ident = j["identification"] = nlohmann::ordered_json::array();
  for (const auto& m : rep.identification) {
    ident.push_back({{"model_id", m.model_id},
                     {"perplexity_pct", detail::optional_number(m.perplexity_pct)},
                     {"vqa_pct", detail::optional_number(m.vqa_pct)}});
  }
  return j.dump(2) + "\n";
}

inline ComparisonReport parse_report(std::string_view text) {
  auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object() ||
      j.value("format", "") != "ergoeval.comparison_report") {
    throw Error(ErrorCode::kMalformedDocument, "not a comparison report document");
  }
  try {
    ComparisonReport rep;
    rep.finetuned_label = j.at("finetuned_label").get<std::string>();
    rep.general_label = j.at("general_label").get<std::string>();
    rep.n = j.at("n").get<std::size_t>();
    for (const auto& m : j.at("metrics")) {
      MetricComparison c;
      auto id = parse_metric_key(m.at("metric").get<std::string>());
      if (!id) throw Error(ErrorCode::kMalformedDocument, "unknown metric in report");
      c.metric = *id;
      c.n = m.at("n").get<std::size_t>();
      c.mean_finetuned = m.at("mean_finetuned").get<double>();
      c.mean_general = m.at("mean_general").get<double>();
      c.avg_difference = m.at("avg_difference").get<double>();
      c.pct_improved = m.at("pct_improved").get<double>();
      c.pct_tied = m.at("pct_tied").get<double>();
      c.pct_worsened = m.at("pct_worsened").get<double>();
      c.avg_improvement_pct = detail::read_optional(m, "avg_improvement_pct");
      rep.metrics.push_back(c);
    }
    for (const auto& m : j.at("identification")) {
      rep.identification.push_back({m.at("model_id").get<std::string>(),
                                    detail::read_optional(m, "perplexity_pct"),
                                    detail::read_optional(m, "vqa_pct")});
    }
    return rep;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedDocument, e.what());
  }
}

// ---------------------------------------------------------------------------
// Per-model evaluation summary written next to a score file

struct EvaluationSummary {
  std::string model_id;
  std::size_t caption_images = 0;
  std::optional<VqaResult> vqa;
  std::optional<AgreementResult> perplexity;
  std::vector<std::pair<MetricId, double>> metric_means;
};

inline std::vector<std::pair<MetricId, double>> metric_means(const std::vector<ScoreRecord>& scores) {
  std::map<MetricId, std::pair<double, std::size_t>> acc;
  for (const auto& s : scores) {
    auto& [sum, n] = acc[s.metric];
    sum += s.value;
    ++n;
  }
  std::vector<std::pair<MetricId, double>> out;
  for (const auto& [m, v] : acc) out.emplace_back(m, v.first / static_cast<double>(v.second));
  return out;
}

inline std::string serialize_summary(const EvaluationSummary& s) {
  nlohmann::ordered_json j;
  j["format"] = "ergoeval.evaluation_summary";
  j["model_id"] = s.model_id;
  j["caption_images"] = s.caption_images;
  if (s.vqa) {
    j["vqa"] = {{"accuracy_pct", s.vqa->accuracy_pct},
                {"correct", s.vqa->correct},
                {"n", s.vqa->n},
                {"unparseable", s.vqa->unparseable},
                {"incorrect", s.vqa->incorrect}};
  } else {
    j["vqa"] = nullptr;
  }
  if (s.perplexity) {
    j["perplexity"] = {{"agreement_pct", s.perplexity->agreement_pct},
                       {"agree", s.perplexity->agree},
                       {"n", s.perplexity->n},
                       {"degenerate", s.perplexity->degenerate}};
  } else {
    j["perplexity"] = nullptr;
  }
  auto& means = j["metric_means"] = nlohmann::ordered_json::object();
  for (const auto& [m, v] : s.metric_means) means[std::string(metric_key(m))] = v;
  return j.dump(2) + "\n";
}

/// Reads the identification row (model id, perplexity and VQA rates) back
/// out of a summary document.
inline ModelIdentification parse_summary_identification(std::string_view text) {
  auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object() ||
      j.value("format", "") != "ergoeval.evaluation_summary") {
    throw Error(ErrorCode::kMalformedDocument, "not an evaluation summary document");
  }
  ModelIdentification m;
  m.model_id = j.value("model_id", "");
  if (j.contains("perplexity") && j["perplexity"].is_object()) {
    m.perplexity_pct = j["perplexity"].value("agreement_pct", 0.0);
  }
  if (j.contains("vqa") && j["vqa"].is_object()) m.vqa_pct = j["vqa"].value("accuracy_pct", 0.0);
  return m;
}

}  // namespace ergoeval
