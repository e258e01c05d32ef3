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

// Human evaluation: questionnaire versions, response loading, and the
// choice-rate / improvement statistics.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ergoeval/csv.hpp"
#include "ergoeval/dataset.hpp"
#include "ergoeval/error.hpp"
#include "ergoeval/random.hpp"
#include "ergoeval/report.hpp"
#include "json.hpp"

namespace ergoeval {

inline constexpr std::size_t kSurveyImages = 200;
inline constexpr std::size_t kSurveyVersions = 13;
inline constexpr std::size_t kShortVersions = 8;  // 15 images each
inline constexpr std::size_t kShortVersionSize = 15;
inline constexpr std::size_t kLongVersionSize = 16;  // remaining 5 versions
inline constexpr std::array<int, 6> kImprovementLevels{0, 20, 40, 60, 80, 100};

struct SurveyQuestion {
  ImageId image_id = 0;
  /// True when option A shows the fine-tuned model's description.
  bool finetuned_is_a = false;

  friend bool operator==(const SurveyQuestion&, const SurveyQuestion&) = default;
};

struct SurveyVersion {
  int version_id = 0;
  std::vector<SurveyQuestion> questions;

  friend bool operator==(const SurveyVersion&, const SurveyVersion&) = default;
};

struct SurveyPlan {
  std::uint64_t seed = 0;
  std::vector<SurveyVersion> versions;

  friend bool operator==(const SurveyPlan&, const SurveyPlan&) = default;
};

/// Partitions exactly 200 test images into 8 versions of 15 and 5 of 16 and
/// draws which option shows the fine-tuned text for every question.
inline SurveyPlan plan_versions(std::span<const ImageId> test_image_ids, std::uint64_t seed) {
  std::vector<ImageId> ids(test_image_ids.begin(), test_image_ids.end());
  std::sort(ids.begin(), ids.end());
  if (ids.size() != kSurveyImages ||
      std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw Error(ErrorCode::kWrongImageCount,
                "survey plan needs exactly " + std::to_string(kSurveyImages) +
                    " distinct image ids, got " + std::to_string(test_image_ids.size()));
  }
  SeededRng rng(seed);
  rng.shuffle(std::span<ImageId>(ids));
  SurveyPlan plan;
  plan.seed = seed;
  std::size_t next = 0;
  for (std::size_t v = 0; v < kSurveyVersions; ++v) {
    SurveyVersion version;
    version.version_id = static_cast<int>(v) + 1;
    const auto size = v < kShortVersions ? kShortVersionSize : kLongVersionSize;
    for (std::size_t q = 0; q < size; ++q) version.questions.push_back({ids[next++], rng.coin()});
    plan.versions.push_back(std::move(version));
  }
  return plan;
}

inline std::string serialize_plan(const SurveyPlan& plan) {
  nlohmann::ordered_json j;
  j["format"] = "ergoeval.survey_plan";
  j["seed"] = plan.seed;
  auto& versions = j["versions"] = nlohmann::ordered_json::array();
  for (const auto& v : plan.versions) {
    nlohmann::ordered_json jv;
    jv["version_id"] = v.version_id;
    auto& qs = jv["questions"] = nlohmann::ordered_json::array();
    for (const auto& q : v.questions) {
      qs.push_back({{"image_id", q.image_id}, {"option_a", q.finetuned_is_a ? "fine_tuned" : "general"},
                    {"option_b", q.finetuned_is_a ? "general" : "fine_tuned"}});
    }
    versions.push_back(std::move(jv));
  }
  return j.dump(2) + "\n";
}

inline SurveyPlan parse_plan(std::string_view text) {
  auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object() || j.value("format", "") != "ergoeval.survey_plan") {
    throw Error(ErrorCode::kMalformedDocument, "not a survey plan document");
  }
  try {
    SurveyPlan plan;
    plan.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& jv : j.at("versions")) {
      SurveyVersion v;
      v.version_id = jv.at("version_id").get<int>();
      for (const auto& jq : jv.at("questions")) {
        const auto a = jq.at("option_a").get<std::string>();
        if (a != "fine_tuned" && a != "general") {
          throw Error(ErrorCode::kMalformedDocument, "option_a must name a model");
        }
        v.questions.push_back({jq.at("image_id").get<ImageId>(), a == "fine_tuned"});
      }
      plan.versions.push_back(std::move(v));
    }
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedDocument, e.what());
  }
}

// ---------------------------------------------------------------------------
// Responses

enum class SurveyOption { kA, kB };
enum class ModelChoice { kFineTuned, kGeneral };

struct Demographics {
  std::string education;
  std::string sector;
  std::string expertise;
  std::string age;

  friend bool operator==(const Demographics&, const Demographics&) = default;
};

struct SurveyResponse {
  std::string participant_id;
  int version_id = 0;
  ImageId image_id = 0;
  SurveyOption selected_option = SurveyOption::kA;
  int improvement_pct = 0;
  Demographics demographics;

  friend bool operator==(const SurveyResponse&, const SurveyResponse&) = default;
};

inline constexpr std::array<std::string_view, 9> kResponseColumns{
    "participant_id", "version_id", "image_id",  "selected_option", "improvement_pct",
    "education",      "sector",     "expertise", "age"};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

inline std::int64_t parse_int(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const auto v = std::stoll(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kMalformedDocument, where + ": \"" + s + "\" is not an integer");
}

}  // namespace detail

/// Parses the response CSV. The header must name all nine columns (any
/// order); every row must answer both questions.
inline std::vector<SurveyResponse> parse_responses(std::string_view text) {
  const auto rows = parse_csv(text);
  if (rows.empty()) throw Error(ErrorCode::kMalformedDocument, "response file has no header");
  std::array<std::size_t, kResponseColumns.size()> col{};
  for (std::size_t k = 0; k < kResponseColumns.size(); ++k) {
    auto it = std::find_if(rows[0].begin(), rows[0].end(), [&](const std::string& h) {
      return detail::trim(h) == kResponseColumns[k];
    });
    if (it == rows[0].end()) {
      throw Error(ErrorCode::kMalformedDocument,
                  "response header lacks column " + std::string(kResponseColumns[k]));
    }
    col[k] = static_cast<std::size_t>(it - rows[0].begin());
  }

  std::vector<SurveyResponse> out;
  std::set<std::pair<std::string, ImageId>> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto where = "response row " + std::to_string(r);
    const auto& row = rows[r];
    if (row.size() != rows[0].size()) {
      throw Error(ErrorCode::kMalformedDocument, where + " has the wrong number of fields");
    }
    auto field = [&](std::size_t k) { return detail::trim(row[col[k]]); };
    SurveyResponse resp;
    resp.participant_id = field(0);
    if (resp.participant_id.empty()) {
      throw Error(ErrorCode::kMalformedDocument, where + ": empty participant_id");
    }
    resp.version_id = static_cast<int>(detail::parse_int(field(1), where));
    resp.image_id = detail::parse_int(field(2), where);
    const auto option = field(3);
    if (option == "A" || option == "a") {
      resp.selected_option = SurveyOption::kA;
    } else if (option == "B" || option == "b") {
      resp.selected_option = SurveyOption::kB;
    } else {
      throw Error(ErrorCode::kMalformedDocument, where + ": selected_option must be A or B",
                  resp.image_id);
    }
    auto improvement = field(4);
    if (!improvement.empty() && improvement.back() == '%') improvement.pop_back();
    if (improvement.empty()) {
      throw Error(ErrorCode::kMalformedDocument, where + ": improvement_pct is required",
                  resp.image_id);
    }
    resp.improvement_pct = static_cast<int>(detail::parse_int(improvement, where));
    if (std::find(kImprovementLevels.begin(), kImprovementLevels.end(), resp.improvement_pct) ==
        kImprovementLevels.end()) {
      throw Error(ErrorCode::kInvariantViolation,
                  where + ": improvement_pct must be one of 0,20,40,60,80,100", resp.image_id);
    }
    resp.demographics = {field(5), field(6), field(7), field(8)};
    if (!seen.emplace(resp.participant_id, resp.image_id).second) {
      throw Error(ErrorCode::kInvariantViolation,
                  where + ": participant " + resp.participant_id + " answered image " +
                      std::to_string(resp.image_id) + " twice",
                  resp.image_id);
    }
    out.push_back(std::move(resp));
  }
  return out;
}

inline std::vector<SurveyResponse> load_responses(const std::filesystem::path& path) {
  return parse_responses(read_file(path));
}

struct ResolvedChoice {
  SurveyResponse response;
  ModelChoice chosen = ModelChoice::kGeneral;
};

/// Maps each selected option back to the model that produced it.
inline std::vector<ResolvedChoice> resolve_choices(std::span<const SurveyResponse> responses,
                                                   const SurveyPlan& plan) {
  std::map<std::pair<int, ImageId>, bool> key;
  for (const auto& v : plan.versions) {
    for (const auto& q : v.questions) key[{v.version_id, q.image_id}] = q.finetuned_is_a;
  }
  std::vector<ResolvedChoice> out;
  out.reserve(responses.size());
  for (const auto& r : responses) {
    auto it = key.find({r.version_id, r.image_id});
    if (it == key.end()) {
      throw Error(ErrorCode::kUnknownQuestion,
                  "version " + std::to_string(r.version_id) + " has no question for image " +
                      std::to_string(r.image_id),
                  r.image_id);
    }
    const bool picked_a = r.selected_option == SurveyOption::kA;
    out.push_back({r, picked_a == it->second ? ModelChoice::kFineTuned : ModelChoice::kGeneral});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Statistics

struct DistributionRow {
  std::string value;
  std::size_t count = 0;
  int pct = 0;  // rounded to an integer

  friend bool operator==(const DistributionRow&, const DistributionRow&) = default;
};

struct Distribution {
  std::string field;
  std::vector<DistributionRow> rows;  // by descending count, then value

  friend bool operator==(const Distribution&, const Distribution&) = default;
};

struct DemographicsSummary {
  std::size_t participants = 0;
  std::vector<Distribution> fields;  // education, sector, expertise, age

  friend bool operator==(const DemographicsSummary&, const DemographicsSummary&) = default;
};

/// Percentages are over distinct participants, not responses.
inline DemographicsSummary demographics_summary(std::span<const SurveyResponse> responses) {
  std::map<std::string, Demographics> people;
  for (const auto& r : responses) {
    auto [it, inserted] = people.emplace(r.participant_id, r.demographics);
    if (!inserted && !(it->second == r.demographics)) {
      throw Error(ErrorCode::kInvariantViolation,
                  "participant " + r.participant_id + " reports conflicting demographics",
                  r.image_id);
    }
  }
  DemographicsSummary s;
  s.participants = people.size();
  const std::array<std::pair<const char*, std::string Demographics::*>, 4> fields{{
      {"education", &Demographics::education},
      {"sector", &Demographics::sector},
      {"expertise", &Demographics::expertise},
      {"age", &Demographics::age},
  }};
  for (const auto& [name, member] : fields) {
    std::map<std::string, std::size_t> counts;
    for (const auto& [id, d] : people) ++counts[d.*member];
    Distribution dist{name, {}};
    for (const auto& [value, count] : counts) {
      const double pct = 100.0 * static_cast<double>(count) / static_cast<double>(s.participants);
      dist.rows.push_back({value, count, static_cast<int>(std::floor(pct + 0.5))});
    }
    std::stable_sort(dist.rows.begin(), dist.rows.end(),
                     [](const auto& a, const auto& b) { return a.count > b.count; });
    s.fields.push_back(std::move(dist));
  }
  return s;
}

struct SurveySummary {
  std::size_t n_responses = 0;
  std::size_t finetuned_choices = 0;
  double fine_tuned_choice_rate = 0.0;
  double general_choice_rate = 0.0;
  /// Mean improvement over responses that chose the fine-tuned text; empty
  /// when none did.
  std::optional<double> avg_improvement_finetuned;
  /// Mean improvement over all responses.
  double avg_improvement_all = 0.0;
  DemographicsSummary demographics;
};

inline SurveySummary summarize(std::span<const ResolvedChoice> records) {
  if (records.empty()) throw Error(ErrorCode::kEmptyResponses, "no survey responses to summarize");
  SurveySummary s;
  s.n_responses = records.size();
  long ft_improvement = 0, all_improvement = 0;
  std::vector<SurveyResponse> responses;
  responses.reserve(records.size());
  for (const auto& r : records) {
    all_improvement += r.response.improvement_pct;
    if (r.chosen == ModelChoice::kFineTuned) {
      ++s.finetuned_choices;
      ft_improvement += r.response.improvement_pct;
    }
    responses.push_back(r.response);
  }
  const double n = static_cast<double>(s.n_responses);
  s.fine_tuned_choice_rate = 100.0 * static_cast<double>(s.finetuned_choices) / n;
  s.general_choice_rate = 100.0 * static_cast<double>(s.n_responses - s.finetuned_choices) / n;
  if (s.finetuned_choices > 0) {
    s.avg_improvement_finetuned =
        static_cast<double>(ft_improvement) / static_cast<double>(s.finetuned_choices);
  }
  s.avg_improvement_all = static_cast<double>(all_improvement) / n;
  s.demographics = demographics_summary(responses);
  return s;
}

inline std::string render_survey_summary(const SurveySummary& s, ReportFormat format) {
  std::string out;
  detail::render_table(
      out, "Human evaluation (n=" + std::to_string(s.n_responses) + " responses)",
      {{"Metric", "Fine-tuned choice rate", "Average accuracy improvement compared to the other choice",
        "Average accuracy improvement over all responses"},
       {"Value", format_percent(s.fine_tuned_choice_rate, 1),
        s.avg_improvement_finetuned ? format_percent(*s.avg_improvement_finetuned, 1) : "N/A",
        format_percent(s.avg_improvement_all, 1)}},
      format);
  for (const auto& dist : s.demographics.fields) {
    detail::Table t{{dist.field, "participants", "share"}};
    for (const auto& row : dist.rows) {
      t.push_back({row.value.empty() ? "(blank)" : row.value, std::to_string(row.count),
                   std::to_string(row.pct) + "%"});
    }
    detail::render_table(out,
                         "Participants by " + dist.field + " (n=" +
                             std::to_string(s.demographics.participants) + ")",
                         t, format);
  }
  return out;
}

inline std::string serialize_survey_summary(const SurveySummary& s) {
  nlohmann::ordered_json j;
  j["format"] = "ergoeval.survey_summary";
  j["n_responses"] = s.n_responses;
  j["finetuned_choices"] = s.finetuned_choices;
  j["fine_tuned_choice_rate"] = s.fine_tuned_choice_rate;
  j["general_choice_rate"] = s.general_choice_rate;
  j["avg_improvement_finetuned"] =
      s.avg_improvement_finetuned ? nlohmann::ordered_json(*s.avg_improvement_finetuned)
                                  : nlohmann::ordered_json(nullptr);
  j["avg_improvement_all"] = s.avg_improvement_all;
  j["participants"] = s.demographics.participants;
  auto& demo = j["demographics"] = nlohmann::ordered_json::object();
  for (const auto& dist : s.demographics.fields) {
    auto rows = nlohmann::ordered_json::array();
    for (const auto& r : dist.rows) {
      rows.push_back({{"value", r.value}, {"count", r.count}, {"pct", r.pct}});
    }
    demo[dist.field] = std::move(rows);
  }
  return j.dump(2) + "\n";
}

}  // namespace ergoeval
