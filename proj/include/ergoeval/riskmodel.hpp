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

// Interpolated add-k n-gram language models and the two-model perplexity
// classifier used to read a risk verdict out of a free-text description.

#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ergoeval/dataset.hpp"
#include "ergoeval/error.hpp"
#include "ergoeval/textproc.hpp"
#include "json.hpp"

namespace ergoeval {

inline constexpr std::string_view kUnknownToken = "<unk>";
inline constexpr std::string_view kBoundaryToken = "<s>";

struct SmoothingConfig {
  int order = 2;
  double k = 1.0;
  /// Interpolation weight per order, index 0 is the unigram component.
  std::vector<double> weights{0.25, 0.75};

  friend bool operator==(const SmoothingConfig&, const SmoothingConfig&) = default;
};

inline void validate(const SmoothingConfig& cfg) {
  if (cfg.order < 1) throw Error(ErrorCode::kInvalidOrder, "language model order must be >= 1");
  if (!(cfg.k > 0.0) || !std::isfinite(cfg.k)) {
    throw Error(ErrorCode::kInvalidSmoothing, "add-k constant must be positive");
  }
  if (cfg.weights.size() != static_cast<std::size_t>(cfg.order)) {
    throw Error(ErrorCode::kInvalidSmoothing, "need one interpolation weight per order");
  }
  double sum = 0.0;
  for (double w : cfg.weights) {
    if (!(w >= 0.0)) throw Error(ErrorCode::kInvalidSmoothing, "weights must be non-negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidSmoothing, "interpolation weights must sum to 1");
  }
}

/// Count tables indexed by order - 1; contexts are padded with "<s>".
using NGramTables = std::vector<std::map<NGram, long>>;

class NGramLanguageModel {
 public:
  NGramLanguageModel() = default;

  /// Builds a model from explicit tables. `vocabulary` need not contain the
  /// unknown token; it is always added.
  static NGramLanguageModel from_tables(SmoothingConfig cfg, std::vector<std::string> vocabulary,
                                        NGramTables counts) {
    validate(cfg);
    if (counts.size() != static_cast<std::size_t>(cfg.order)) {
      throw Error(ErrorCode::kMalformedDocument, "count tables do not match model order");
    }
    NGramLanguageModel lm;
    lm.config_ = std::move(cfg);
    vocabulary.emplace_back(kUnknownToken);
    std::sort(vocabulary.begin(), vocabulary.end());
    vocabulary.erase(std::unique(vocabulary.begin(), vocabulary.end()), vocabulary.end());
    lm.vocabulary_ = std::move(vocabulary);
    for (std::size_t n = 0; n < counts.size(); ++n) {
      for (const auto& [gram, c] : counts[n]) {
        if (gram.size() != n + 1 || c < 0) {
          throw Error(ErrorCode::kMalformedDocument, "malformed n-gram count entry");
        }
        if (!lm.in_vocabulary(gram.back())) {
          throw Error(ErrorCode::kMalformedDocument,
                      "n-gram predicts out-of-vocabulary token " + gram.back());
        }
      }
    }
    lm.counts_ = std::move(counts);
    lm.rebuild_context_totals();
    return lm;
  }

  const SmoothingConfig& config() const { return config_; }
  int order() const { return config_.order; }
  const std::vector<std::string>& vocabulary() const { return vocabulary_; }
  const NGramTables& counts() const { return counts_; }

  /// |vocabulary| including the unknown token.
  std::size_t vocabulary_size() const { return vocabulary_.size(); }

  bool in_vocabulary(const std::string& token) const {
    return std::binary_search(vocabulary_.begin(), vocabulary_.end(), token);
  }

  std::string map_token(const std::string& token) const {
    return in_vocabulary(token) ? token : std::string(kUnknownToken);
  }

  /// P(word | history) with `history` holding exactly order-1 mapped tokens
  /// (boundary-padded).
  double probability(const std::string& word, std::span<const std::string> history) const {
    if (history.size() < static_cast<std::size_t>(config_.order - 1)) {
      throw Error(ErrorCode::kInvariantViolation, "history shorter than order - 1 tokens");
    }
    const std::string w = map_token(word);
    const double v = static_cast<double>(vocabulary_size());
    double p = 0.0;
    for (int n = 1; n <= config_.order; ++n) {
      const double weight = config_.weights[static_cast<std::size_t>(n - 1)];
      if (weight == 0.0) continue;
      NGram gram(history.end() - (n - 1), history.end());
      const double context_total = lookup(context_totals_[static_cast<std::size_t>(n - 1)], gram);
      gram.push_back(w);
      const double c = lookup(counts_[static_cast<std::size_t>(n - 1)], gram);
      p += weight * (c + config_.k) / (context_total + config_.k * v);
    }
    return p;
  }

  /// Σ ln P(token_i | context) over `tokens` (already tokenized).
  double log_probability(std::span<const std::string> tokens) const {
    const auto pad = static_cast<std::size_t>(config_.order - 1);
    std::vector<std::string> padded(pad, std::string(kBoundaryToken));
    for (const auto& t : tokens) padded.push_back(map_token(t));
    double sum = 0.0;
    for (std::size_t i = pad; i < padded.size(); ++i) {
      std::span<const std::string> history(padded.data() + i - pad, pad);
      sum += std::log(probability(padded[i], history));
    }
    return sum;
  }

  /// Every distinct history observed in training at each order, plus the
  /// all-boundary history. Used for normalization checks.
  std::vector<NGram> observed_histories() const {
    std::vector<NGram> out;
    for (const auto& table : context_totals_) {
      for (const auto& [ctx, total] : table) out.push_back(ctx);
    }
    return out;
  }

  friend bool operator==(const NGramLanguageModel& a, const NGramLanguageModel& b) {
    return a.config_ == b.config_ && a.vocabulary_ == b.vocabulary_ && a.counts_ == b.counts_;
  }

 private:
  static double lookup(const std::map<NGram, long>& table, const NGram& key) {
    auto it = table.find(key);
    return it == table.end() ? 0.0 : static_cast<double>(it->second);
  }

  void rebuild_context_totals() {
    context_totals_.assign(counts_.size(), {});
    for (std::size_t n = 0; n < counts_.size(); ++n) {
      for (const auto& [gram, c] : counts_[n]) {
        context_totals_[n][NGram(gram.begin(), gram.end() - 1)] += c;
      }
    }
  }

  SmoothingConfig config_;
  std::vector<std::string> vocabulary_{std::string(kUnknownToken)};
  NGramTables counts_;
  NGramTables context_totals_;
};

inline NGramLanguageModel train_lm(std::span<const std::string> corpus,
                                   const SmoothingConfig& cfg = {}) {
  validate(cfg);
  if (corpus.empty()) throw Error(ErrorCode::kEmptyCorpus, "language model corpus is empty");
  const auto order = static_cast<std::size_t>(cfg.order);
  NGramTables counts(order);
  std::vector<std::string> vocabulary;
  for (const auto& text : corpus) {
    const auto tokens = tokenize(text);
    std::vector<std::string> padded(order - 1, std::string(kBoundaryToken));
    padded.insert(padded.end(), tokens.begin(), tokens.end());
    for (std::size_t i = order - 1; i < padded.size(); ++i) {
      vocabulary.push_back(padded[i]);
      for (std::size_t n = 1; n <= order; ++n) {
        counts[n - 1][NGram(padded.begin() + static_cast<std::ptrdiff_t>(i + 1 - n),
                            padded.begin() + static_cast<std::ptrdiff_t>(i + 1))] += 1;
      }
    }
  }
  return NGramLanguageModel::from_tables(cfg, std::move(vocabulary), std::move(counts));
}

/// exp(-(1/N) Σ ln p); N is the token count of `text`.
inline double perplexity(std::string_view text, const NGramLanguageModel& lm) {
  const auto tokens = tokenize(text);
  if (tokens.empty()) throw Error(ErrorCode::kEmptyText, "cannot score text without tokens");
  return std::exp(-lm.log_probability(tokens) / static_cast<double>(tokens.size()));
}

struct RiskDecision {
  bool risk_exposed = false;
  double pp_risk = 0.0;
  double pp_norisk = 0.0;
};

class RiskClassifier {
 public:
  RiskClassifier() = default;
  RiskClassifier(NGramLanguageModel lm_risk, NGramLanguageModel lm_norisk)
      : risk_(std::move(lm_risk)), norisk_(std::move(lm_norisk)) {
    if (!(risk_.config() == norisk_.config())) {
      throw Error(ErrorCode::kInvalidSmoothing, "class models must share order and smoothing");
    }
  }

  const NGramLanguageModel& risk_model() const { return risk_; }
  const NGramLanguageModel& norisk_model() const { return norisk_; }

  /// Risk-exposed when the risk model's perplexity is not larger; the
  /// comparison is made on mean log-likelihoods so it is exact in sign.
  RiskDecision classify(std::string_view text) const {
    const auto tokens = tokenize(text);
    if (tokens.empty()) throw Error(ErrorCode::kEmptyText, "cannot classify text without tokens");
    const double n = static_cast<double>(tokens.size());
    const double log_pp_risk = -risk_.log_probability(tokens) / n;
    const double log_pp_norisk = -norisk_.log_probability(tokens) / n;
    return {log_pp_risk <= log_pp_norisk, std::exp(log_pp_risk), std::exp(log_pp_norisk)};
  }

  friend bool operator==(const RiskClassifier&, const RiskClassifier&) = default;

 private:
  NGramLanguageModel risk_;
  NGramLanguageModel norisk_;
};

inline RiskDecision classify_risk(std::string_view text, const RiskClassifier& c) {
  return c.classify(text);
}

/// Trains one model on risk-exposed captions and one on the rest.
inline RiskClassifier train_risk_classifier(const Dataset& d, const SmoothingConfig& cfg = {}) {
  std::vector<std::string> risk, norisk;
  for (const auto& a : d.annotations()) {
    if (a.task != Task::kCaption) continue;
    (a.risk_exposed ? risk : norisk).push_back(a.text);
  }
  if (risk.empty() || norisk.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, "both risk classes need at least one caption");
  }
  return {train_lm(risk, cfg), train_lm(norisk, cfg)};
}

// ---------------------------------------------------------------------------
// Serialization

inline constexpr int kModelFormatVersion = 1;

inline nlohmann::ordered_json lm_to_json(const NGramLanguageModel& lm) {
  nlohmann::ordered_json j;
  j["format"] = "ergoeval.ngram_lm";
  j["version"] = kModelFormatVersion;
  j["order"] = lm.order();
  j["k"] = lm.config().k;
  j["weights"] = lm.config().weights;
  j["vocabulary"] = lm.vocabulary();
  auto& tables = j["counts"] = nlohmann::ordered_json::array();
  for (const auto& table : lm.counts()) {
    auto rows = nlohmann::ordered_json::array();
    for (const auto& [gram, c] : table) rows.push_back({gram, c});
    tables.push_back(std::move(rows));
  }
  return j;
}

inline NGramLanguageModel lm_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "ergoeval.ngram_lm") {
      throw Error(ErrorCode::kMalformedDocument, "not a language model document");
    }
    if (j.at("version").get<int>() != kModelFormatVersion) {
      throw Error(ErrorCode::kMalformedDocument, "unsupported language model version");
    }
    SmoothingConfig cfg;
    cfg.order = j.at("order").get<int>();
    cfg.k = j.at("k").get<double>();
    cfg.weights = j.at("weights").get<std::vector<double>>();
    NGramTables tables;
    for (const auto& rows : j.at("counts")) {
      auto& table = tables.emplace_back();
      for (const auto& row : rows) {
        table[row.at(0).get<NGram>()] = row.at(1).get<long>();
      }
    }
    auto vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
    return NGramLanguageModel::from_tables(std::move(cfg), std::move(vocabulary),
                                           std::move(tables));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedDocument, e.what());
  }
}

inline std::string serialize_classifier(const RiskClassifier& c) {
  nlohmann::ordered_json j;
  j["format"] = "ergoeval.risk_classifier";
  j["version"] = kModelFormatVersion;
  j["risk"] = lm_to_json(c.risk_model());
  j["norisk"] = lm_to_json(c.norisk_model());
  return j.dump(2) + "\n";
}

inline RiskClassifier parse_classifier(std::string_view text) {
  auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object() || j.value("format", "") != "ergoeval.risk_classifier") {
    throw Error(ErrorCode::kMalformedDocument, "not a risk classifier document");
  }
  if (j.value("version", 0) != kModelFormatVersion) {
    throw Error(ErrorCode::kMalformedDocument, "unsupported risk classifier version");
  }
  if (!j.contains("risk") || !j.contains("norisk")) {
    throw Error(ErrorCode::kMalformedDocument, "risk classifier needs both class models");
  }
  return {lm_from_json(j["risk"]), lm_from_json(j["norisk"])};
}

}  // namespace ergoeval
