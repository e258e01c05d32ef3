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

#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "ergoeval/dataset.hpp"
#include "ergoeval/error.hpp"
#include "ergoeval/meteor.hpp"
#include "ergoeval/metrics.hpp"
#include "ergoeval/parallel.hpp"
#include "ergoeval/riskmodel.hpp"
#include "ergoeval/spice_lite.hpp"
#include "ergoeval/textproc.hpp"
#include "json.hpp"

namespace ergoeval {

struct PredictionRecord {
  std::string model_id;
  ImageId image_id = 0;
  Task task = Task::kCaption;
  std::string prompt;
  std::string output_text;

  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

struct ScoreRecord {
  ImageId image_id = 0;
  MetricId metric = MetricId::kRougeR;
  double value = 0.0;
  bool degenerate = false;

  friend bool operator==(const ScoreRecord&, const ScoreRecord&) = default;
};

// ---------------------------------------------------------------------------
// JSON-lines files

namespace detail {

template <typename Fn>
void for_each_jsonl(std::string_view text, const std::string& what, Fn&& fn) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw Error(ErrorCode::kMalformedDocument,
                  what + " line " + std::to_string(line_no) + " is not a JSON object");
    }
    try {
      fn(j);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kMalformedDocument,
                  what + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

}  // namespace detail

inline std::string prediction_to_jsonl(const PredictionRecord& p) {
  nlohmann::ordered_json j;
  j["model_id"] = p.model_id;
  j["image_id"] = p.image_id;
  j["task"] = std::string(task_name(p.task));
  j["prompt"] = p.prompt;
  j["output_text"] = p.output_text;
  return j.dump() + "\n";
}

inline std::string serialize_predictions(const std::vector<PredictionRecord>& preds) {
  std::string out;
  for (const auto& p : preds) out += prediction_to_jsonl(p);
  return out;
}

/// Checks (model_id, image_id, task) uniqueness and that every prompt is the
/// fixed prompt of its task.
inline void validate_predictions(const std::vector<PredictionRecord>& preds) {
  std::set<std::tuple<std::string, ImageId, Task>> seen;
  for (const auto& p : preds) {
    if (!seen.emplace(p.model_id, p.image_id, p.task).second) {
      throw Error(ErrorCode::kInvariantViolation,
                  "duplicate prediction for model " + p.model_id + ", image " +
                      std::to_string(p.image_id) + ", task " + std::string(task_name(p.task)),
                  p.image_id);
    }
    if (p.prompt != build_prompt(p.task)) {
      throw Error(ErrorCode::kInvariantViolation,
                  "prediction for image " + std::to_string(p.image_id) +
                      " was not produced with the fixed " + std::string(task_name(p.task)) +
                      " prompt",
                  p.image_id);
    }
  }
}

inline std::vector<PredictionRecord> parse_predictions(std::string_view text) {
  std::vector<PredictionRecord> out;
  detail::for_each_jsonl(text, "prediction", [&](const nlohmann::json& j) {
    PredictionRecord p;
    p.model_id = j.at("model_id").get<std::string>();
    p.image_id = j.at("image_id").get<ImageId>();
    auto task = parse_task_name(j.at("task").get<std::string>());
    if (!task) throw Error(ErrorCode::kMalformedDocument, "unknown task in prediction", p.image_id);
    p.task = *task;
    p.prompt = j.at("prompt").get<std::string>();
    p.output_text = j.at("output_text").get<std::string>();
    out.push_back(std::move(p));
  });
  validate_predictions(out);
  return out;
}

inline std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path) {
  return parse_predictions(read_file(path));
}

inline std::string serialize_scores(const std::vector<ScoreRecord>& scores) {
  std::string out;
  for (const auto& s : scores) {
    nlohmann::ordered_json j;
    j["image_id"] = s.image_id;
    j["metric"] = std::string(metric_key(s.metric));
    j["value"] = s.value;
    j["degenerate"] = s.degenerate;
    out += j.dump() + "\n";
  }
  return out;
}

inline std::vector<ScoreRecord> parse_scores(std::string_view text) {
  std::vector<ScoreRecord> out;
  detail::for_each_jsonl(text, "score", [&](const nlohmann::json& j) {
    ScoreRecord s;
    s.image_id = j.at("image_id").get<ImageId>();
    auto metric = parse_metric_key(j.at("metric").get<std::string>());
    if (!metric) throw Error(ErrorCode::kMalformedDocument, "unknown metric", s.image_id);
    s.metric = *metric;
    s.value = j.at("value").get<double>();
    s.degenerate = j.value("degenerate", false);
    if (!bounds(s.metric).contains(s.value)) {
      throw Error(ErrorCode::kInvariantViolation,
                  "score for image " + std::to_string(s.image_id) + " outside the range of " +
                      std::string(metric_key(s.metric)),
                  s.image_id);
    }
    out.push_back(s);
  });
  return out;
}

inline std::vector<ScoreRecord> load_scores(const std::filesystem::path& path) {
  return parse_scores(read_file(path));
}

/// Predictions of one model for one task, keyed by image.
inline std::map<ImageId, const PredictionRecord*> index_predictions(
    const std::vector<PredictionRecord>& preds, Task task) {
  std::map<ImageId, const PredictionRecord*> out;
  std::string model;
  for (const auto& p : preds) {
    if (p.task != task) continue;
    if (!out.empty() && p.model_id != model) {
      throw Error(ErrorCode::kInvariantViolation,
                  "predictions mix models " + model + " and " + p.model_id, p.image_id);
    }
    model = p.model_id;
    if (!out.emplace(p.image_id, &p).second) {
      throw Error(ErrorCode::kInvariantViolation,
                  "duplicate prediction for image " + std::to_string(p.image_id), p.image_id);
    }
  }
  return out;
}

/// Keeps only the records of one model.
inline std::vector<PredictionRecord> predictions_of(const std::vector<PredictionRecord>& preds,
                                                    std::string_view model_id) {
  std::vector<PredictionRecord> out;
  for (const auto& p : preds) {
    if (p.model_id == model_id) out.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// VQA accuracy

enum class VqaAnswer { kYes, kNo, kUnparseable };

/// First whole-word "yes" or "no" after lowercasing and stripping punctuation.
inline VqaAnswer normalize_vqa_answer(std::string_view output_text) {
  for (const auto& t : tokenize(output_text)) {
    if (t == "yes") return VqaAnswer::kYes;
    if (t == "no") return VqaAnswer::kNo;
  }
  return VqaAnswer::kUnparseable;
}

struct VqaResult {
  double accuracy_pct = 0.0;
  int correct = 0;
  int n = 0;
  std::vector<ImageId> unparseable;
  std::vector<ImageId> incorrect;  // includes unparseable
};

inline VqaResult vqa_accuracy(const std::vector<PredictionRecord>& preds, const Dataset& d) {
  const auto by_image = index_predictions(preds, Task::kVqa);
  VqaResult r;
  for (ImageId image : d.images_with(Task::kVqa)) {
    auto it = by_image.find(image);
    if (it == by_image.end()) {
      throw Error(ErrorCode::kMissingPrediction,
                  "no vqa prediction for image " + std::to_string(image), image);
    }
    const auto truth = d.annotations_for(image, Task::kVqa).front()->text == "yes"
                           ? VqaAnswer::kYes
                           : VqaAnswer::kNo;
    const auto answer = normalize_vqa_answer(it->second->output_text);
    ++r.n;
    if (answer == truth) {
      ++r.correct;
    } else {
      r.incorrect.push_back(image);
      if (answer == VqaAnswer::kUnparseable) r.unparseable.push_back(image);
    }
  }
  r.accuracy_pct = r.n == 0 ? 0.0 : 100.0 * r.correct / r.n;
  return r;
}

// ---------------------------------------------------------------------------
// Caption scoring

namespace detail {

inline MetricResult best_of(const std::vector<MetricResult>& results, bool higher_is_better) {
  MetricResult best = results.front();
  for (const auto& r : results) {
    if (higher_is_better ? r.value > best.value : r.value < best.value) best = r;
  }
  return best;
}

/// The nine caption metrics for one prediction. Single-reference metrics
/// take the best value over the references in the metric's own direction.
inline std::vector<ScoreRecord> score_one(ImageId image, const std::string& output,
                                          const std::vector<std::string>& references,
                                          const InfoTable& info) {
  const auto cand = tokenize(output);
  std::vector<TokenSequence> refs;
  for (const auto& r : references) refs.push_back(tokenize(r));

  std::map<MetricId, std::vector<MetricResult>> per_ref;
  for (std::size_t k = 0; k < refs.size(); ++k) {
    const auto rouge = rouge1(cand, refs[k]);
    per_ref[MetricId::kRougeR].push_back({rouge.recall, rouge.degenerate});
    per_ref[MetricId::kRougeP].push_back({rouge.precision, rouge.degenerate});
    per_ref[MetricId::kRougeF].push_back({rouge.f, rouge.degenerate});
    per_ref[MetricId::kCosineSim].push_back(cosine_similarity(cand, refs[k]));
    per_ref[MetricId::kEuclideanDist].push_back(euclidean_distance(cand, refs[k]));
    const auto met = meteor(cand, refs[k]);
    per_ref[MetricId::kMeteor].push_back({met.value, met.degenerate});
    per_ref[MetricId::kSpice].push_back(spice_lite(output, references[k]));
  }

  std::vector<ScoreRecord> out;
  out.reserve(kCaptionMetrics.size());
  for (auto m : kCaptionMetrics) {
    MetricResult r;
    if (m == MetricId::kBleu) {
      r = bleu(cand, refs);
    } else if (m == MetricId::kNist) {
      r = nist(cand, refs, info);
    } else {
      r = best_of(per_ref[m], bounds(m).higher_is_better);
    }
    out.push_back({image, m, r.value, r.degenerate});
  }
  return out;
}

}  // namespace detail

/// NIST information table over every ground-truth caption in `d`.
inline InfoTable caption_info_table(const Dataset& d) {
  std::vector<std::string> corpus;
  for (const auto& a : d.annotations()) {
    if (a.task == Task::kCaption) corpus.push_back(a.text);
  }
  return build_info_table(corpus);
}

/// Nine ScoreRecords per caption image, ordered by (image_id, metric).
inline std::vector<ScoreRecord> score_captions(const std::vector<PredictionRecord>& preds,
                                               const Dataset& d, const InfoTable& info,
                                               std::size_t jobs = 1) {
  const auto by_image = index_predictions(preds, Task::kCaption);
  const auto images = d.images_with(Task::kCaption);
  for (ImageId image : images) {
    if (!by_image.contains(image)) {
      throw Error(ErrorCode::kMissingPrediction,
                  "no caption prediction for image " + std::to_string(image), image);
    }
  }
  std::vector<std::vector<ScoreRecord>> per_image(images.size());
  parallel_for(images.size(), jobs, [&](std::size_t i) {
    std::vector<std::string> references;
    for (const auto* a : d.annotations_for(images[i], Task::kCaption)) references.push_back(a->text);
    per_image[i] =
        detail::score_one(images[i], by_image.at(images[i])->output_text, references, info);
  });
  std::vector<ScoreRecord> out;
  out.reserve(images.size() * kCaptionMetrics.size());
  for (auto& v : per_image) out.insert(out.end(), v.begin(), v.end());
  return out;
}

// ---------------------------------------------------------------------------
// Perplexity agreement

struct AgreementResult {
  double agreement_pct = 0.0;
  int agree = 0;
  int n = 0;
  /// Images whose caption output had no tokens; counted as disagreeing.
  std::vector<ImageId> degenerate;
};

inline AgreementResult perplexity_agreement(const std::vector<PredictionRecord>& preds,
                                            const Dataset& d, const RiskClassifier& c) {
  const auto by_image = index_predictions(preds, Task::kCaption);
  AgreementResult r;
  for (ImageId image : d.images_with(Task::kCaption)) {
    auto it = by_image.find(image);
    if (it == by_image.end()) {
      throw Error(ErrorCode::kMissingPrediction,
                  "no caption prediction for image " + std::to_string(image), image);
    }
    ++r.n;
    if (tokenize(it->second->output_text).empty()) {
      r.degenerate.push_back(image);
      continue;
    }
    if (c.classify(it->second->output_text).risk_exposed == *d.risk_label(image)) ++r.agree;
  }
  r.agreement_pct = r.n == 0 ? 0.0 : 100.0 * r.agree / r.n;
  return r;
}

// ---------------------------------------------------------------------------
// Two-run comparison

struct MetricComparison {
  MetricId metric = MetricId::kRougeR;
  std::size_t n = 0;
  double mean_finetuned = 0.0;
  double mean_general = 0.0;
  /// Mean of (fine-tuned - general).
  double avg_difference = 0.0;
  /// Share of images that moved in the metric's beneficial direction.
  double pct_improved = 0.0;
  double pct_tied = 0.0;
  double pct_worsened = 0.0;
  /// avg_difference / upper bound * 100; empty for unbounded metrics.
  std::optional<double> avg_improvement_pct;

  friend bool operator==(const MetricComparison&, const MetricComparison&) = default;
};

/// Per-model risk identification rates.
struct ModelIdentification {
  std::string model_id;
  std::optional<double> perplexity_pct;
  std::optional<double> vqa_pct;

  friend bool operator==(const ModelIdentification&, const ModelIdentification&) = default;
};

struct ComparisonReport {
  std::string finetuned_label = "fine-tuned";
  std::string general_label = "general";
  std::size_t n = 0;
  std::vector<MetricComparison> metrics;
  /// Optional identification rows, fine-tuned model first.
  std::vector<ModelIdentification> identification;

  const MetricComparison* find(MetricId m) const {
    for (const auto& c : metrics) {
      if (c.metric == m) return &c;
    }
    return nullptr;
  }

  friend bool operator==(const ComparisonReport&, const ComparisonReport&) = default;
};

namespace detail {

using RunTable = std::map<MetricId, std::map<ImageId, double>>;

inline RunTable tabulate(const std::vector<ScoreRecord>& run, const char* which) {
  RunTable t;
  for (const auto& s : run) {
    if (!t[s.metric].emplace(s.image_id, s.value).second) {
      throw Error(ErrorCode::kMismatchedRuns,
                  std::string(which) + " run scores image " + std::to_string(s.image_id) +
                      " twice for " + std::string(metric_key(s.metric)),
                  s.image_id);
    }
  }
  return t;
}

}  // namespace detail

/// Per-metric aggregates over images in ascending id order.
inline ComparisonReport compare_runs(const std::vector<ScoreRecord>& finetuned,
                                     const std::vector<ScoreRecord>& general) {
  const auto ft = detail::tabulate(finetuned, "fine-tuned");
  const auto gen = detail::tabulate(general, "general");
  if (ft.empty()) throw Error(ErrorCode::kMismatchedRuns, "runs contain no scores");
  if (ft.size() != gen.size()) {
    throw Error(ErrorCode::kMismatchedRuns, "runs cover different metric sets");
  }
  ComparisonReport report;
  report.n = ft.begin()->second.size();
  for (const auto& [metric, ft_values] : ft) {
    auto git = gen.find(metric);
    if (git == gen.end()) {
      throw Error(ErrorCode::kMismatchedRuns,
                  "general run lacks metric " + std::string(metric_key(metric)));
    }
    const auto& gen_values = git->second;
    if (ft_values.size() != report.n || gen_values.size() != report.n) {
      throw Error(ErrorCode::kMismatchedRuns,
                  "metric " + std::string(metric_key(metric)) + " covers a different image count");
    }
    const auto b = bounds(metric);
    MetricComparison c;
    c.metric = metric;
    c.n = report.n;
    double sum_diff = 0.0, sum_ft = 0.0, sum_gen = 0.0;
    std::size_t improved = 0, tied = 0;
    auto g = gen_values.begin();
    for (auto f = ft_values.begin(); f != ft_values.end(); ++f, ++g) {
      if (f->first != g->first) {
        throw Error(ErrorCode::kMismatchedRuns, "runs cover different images", f->first);
      }
      const double diff = f->second - g->second;
      sum_diff += diff;
      sum_ft += f->second;
      sum_gen += g->second;
      if (diff == 0.0) {
        ++tied;
      } else if ((diff > 0.0) == b.higher_is_better) {
        ++improved;
      }
    }
    const double n = static_cast<double>(report.n);
    c.avg_difference = sum_diff / n;
    c.mean_finetuned = sum_ft / n;
    c.mean_general = sum_gen / n;
    c.pct_improved = 100.0 * static_cast<double>(improved) / n;
    c.pct_tied = 100.0 * static_cast<double>(tied) / n;
    c.pct_worsened = 100.0 * static_cast<double>(report.n - improved - tied) / n;
    if (b.bounded_above()) c.avg_improvement_pct = c.avg_difference / b.upper * 100.0;
    report.metrics.push_back(c);
  }
  return report;
}

}  // namespace ergoeval
