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

// Caption similarity metrics. All functions are pure; empty candidates or
// references never throw, they score 0 and set `degenerate`.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ergoeval/error.hpp"
#include "ergoeval/textproc.hpp"

namespace ergoeval {

enum class MetricId {
  kRougeR,
  kRougeP,
  kRougeF,
  kBleu,
  kNist,
  kCosineSim,
  kEuclideanDist,
  kMeteor,
  kSpice,
  kPerplexity,
};

/// The nine caption metrics in report order.
inline constexpr std::array<MetricId, 9> kCaptionMetrics{
    MetricId::kRougeR, MetricId::kRougeP,    MetricId::kRougeF,
    MetricId::kBleu,   MetricId::kNist,      MetricId::kCosineSim,
    MetricId::kEuclideanDist, MetricId::kMeteor, MetricId::kSpice};

inline constexpr std::array<MetricId, 10> kAllMetrics{
    MetricId::kRougeR,        MetricId::kRougeP, MetricId::kRougeF, MetricId::kBleu,
    MetricId::kNist,          MetricId::kCosineSim, MetricId::kEuclideanDist,
    MetricId::kMeteor,        MetricId::kSpice,  MetricId::kPerplexity};

/// Identifier used in score files.
inline std::string_view metric_key(MetricId m) {
  switch (m) {
    case MetricId::kRougeR: return "rouge_r";
    case MetricId::kRougeP: return "rouge_p";
    case MetricId::kRougeF: return "rouge_f";
    case MetricId::kBleu: return "bleu";
    case MetricId::kNist: return "nist";
    case MetricId::kCosineSim: return "cosine_similarity";
    case MetricId::kEuclideanDist: return "euclidean_distance";
    case MetricId::kMeteor: return "meteor";
    case MetricId::kSpice: return "spice";
    case MetricId::kPerplexity: return "perplexity";
  }
  return "";
}

/// Row label used in rendered reports.
inline std::string_view metric_label(MetricId m) {
  switch (m) {
    case MetricId::kRougeR: return "ROUGE_r";
    case MetricId::kRougeP: return "ROUGE_p";
    case MetricId::kRougeF: return "ROUGE_f";
    case MetricId::kBleu: return "BLEU";
    case MetricId::kNist: return "NIST";
    case MetricId::kCosineSim: return "cos_similarity";
    case MetricId::kEuclideanDist: return "Euc_distance";
    case MetricId::kMeteor: return "METEOR";
    case MetricId::kSpice: return "SPICE";
    case MetricId::kPerplexity: return "perplexity";
  }
  return "";
}

inline std::optional<MetricId> parse_metric_key(std::string_view key) {
  for (auto m : kAllMetrics) {
    if (metric_key(m) == key) return m;
  }
  return std::nullopt;
}

struct MetricBounds {
  MetricId metric;
  double lower;
  double upper;  // +inf when unbounded
  bool higher_is_better;

  bool bounded_above() const { return std::isfinite(upper); }
  bool contains(double v) const { return v >= lower && v <= upper; }
};

inline MetricBounds bounds(MetricId m) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  switch (m) {
    case MetricId::kNist: return {m, 0.0, kInf, true};
    case MetricId::kCosineSim: return {m, -1.0, 1.0, true};
    case MetricId::kEuclideanDist: return {m, 0.0, kInf, false};
    case MetricId::kPerplexity: return {m, 1.0, kInf, false};
    default: return {m, 0.0, 1.0, true};
  }
}

struct MetricResult {
  double value = 0.0;
  bool degenerate = false;
};

struct RougeScore {
  double recall = 0.0;
  double precision = 0.0;
  double f = 0.0;
  bool degenerate = false;
};

/// Σ_w min(count_a(w), count_b(w)) over unigrams.
inline int unigram_overlap(std::span<const std::string> a, std::span<const std::string> b) {
  const auto ga = ngrams(a, 1);
  const auto gb = ngrams(b, 1);
  int overlap = 0;
  for (const auto& [gram, count] : ga.counts()) overlap += std::min(count, gb.count(gram));
  return overlap;
}

inline RougeScore rouge1(std::span<const std::string> candidate,
                         std::span<const std::string> reference) {
  RougeScore s;
  s.degenerate = candidate.empty() || reference.empty();
  const double overlap = unigram_overlap(candidate, reference);
  if (!reference.empty()) s.recall = overlap / static_cast<double>(reference.size());
  if (!candidate.empty()) s.precision = overlap / static_cast<double>(candidate.size());
  if (s.recall + s.precision > 0) {
    s.f = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  }
  return s;
}

inline RougeScore rouge1(std::string_view candidate, std::string_view reference) {
  return rouge1(tokenize(candidate), tokenize(reference));
}

// ---------------------------------------------------------------------------
// BLEU

struct NGramPrecision {
  int matches = 0;  // clipped
  int total = 0;    // candidate n-grams of this order
};

/// Clipped n-gram matches for orders 1..max_order; a candidate n-gram's count
/// is clipped to its largest count in any single reference.
inline std::vector<NGramPrecision> clipped_precisions(
    std::span<const std::string> candidate, std::span<const TokenSequence> references,
    int max_order) {
  std::vector<NGramPrecision> out(static_cast<std::size_t>(max_order));
  for (int n = 1; n <= max_order; ++n) {
    const auto cand = ngrams(candidate, n);
    std::vector<NGramMultiset> refs;
    refs.reserve(references.size());
    for (const auto& r : references) refs.push_back(ngrams(r, n));
    auto& p = out[static_cast<std::size_t>(n - 1)];
    p.total = cand.total();
    for (const auto& [gram, count] : cand.counts()) {
      int max_ref = 0;
      for (const auto& r : refs) max_ref = std::max(max_ref, r.count(gram));
      p.matches += std::min(count, max_ref);
    }
  }
  return out;
}

/// Length of the reference closest to `candidate_length`; ties go to the
/// shorter reference.
inline std::size_t closest_reference_length(std::size_t candidate_length,
                                            std::span<const TokenSequence> references) {
  std::size_t best = references.front().size();
  for (const auto& r : references) {
    const auto d = r.size() > candidate_length ? r.size() - candidate_length
                                               : candidate_length - r.size();
    const auto best_d = best > candidate_length ? best - candidate_length
                                                : candidate_length - best;
    if (d < best_d || (d == best_d && r.size() < best)) best = r.size();
  }
  return best;
}

inline constexpr int kBleuOrder = 4;

/// Sentence BLEU-4, uniform weights over the orders the candidate actually
/// has, zero precisions at n >= 2 replaced by 1 / (2 * H_n).
inline MetricResult bleu(std::span<const std::string> candidate,
                         std::span<const TokenSequence> references) {
  if (references.empty()) throw Error(ErrorCode::kEmptyReferences, "bleu needs a reference");
  MetricResult r;
  r.degenerate = candidate.empty() ||
                 std::all_of(references.begin(), references.end(),
                             [](const auto& ref) { return ref.empty(); });
  const auto precisions = clipped_precisions(candidate, references, kBleuOrder);
  if (precisions[0].total == 0 || precisions[0].matches == 0) return r;

  double log_sum = 0.0;
  int orders = 0;
  for (const auto& p : precisions) {
    if (p.total == 0) continue;
    const double pn = p.matches > 0 ? static_cast<double>(p.matches) / p.total
                                    : 1.0 / (2.0 * p.total);
    log_sum += std::log(pn);
    ++orders;
  }
  const double c = static_cast<double>(candidate.size());
  const double ref_len = static_cast<double>(closest_reference_length(candidate.size(), references));
  const double brevity = c >= ref_len ? 1.0 : std::exp(1.0 - ref_len / c);
  r.value = brevity * std::exp(log_sum / orders);
  return r;
}

inline MetricResult bleu(std::string_view candidate, std::span<const std::string> references) {
  std::vector<TokenSequence> refs;
  for (const auto& ref : references) refs.push_back(tokenize(ref));
  return bleu(tokenize(candidate), refs);
}

// ---------------------------------------------------------------------------
// NIST

inline constexpr int kNistOrder = 5;

/// N-gram counts of an information corpus, orders 1..5. Immutable once built.
class InfoTable {
 public:
  InfoTable() = default;

  bool built() const { return built_; }
  long unigram_total() const { return unigram_total_; }

  long count(const NGram& gram) const {
    if (gram.empty()) return unigram_total_;
    if (gram.size() > counts_.size()) return 0;
    const auto& table = counts_[gram.size() - 1];
    auto it = table.find(gram);
    return it == table.end() ? 0 : it->second;
  }

  /// log2(count(prefix) / count(gram)); 0 for n-grams absent from the corpus.
  double info(const NGram& gram) const {
    const long c = count(gram);
    if (c == 0) return 0.0;
    const NGram prefix(gram.begin(), gram.end() - 1);
    return std::log2(static_cast<double>(count(prefix)) / static_cast<double>(c));
  }

  friend InfoTable build_info_table(std::span<const std::string> corpus);

 private:
  bool built_ = false;
  long unigram_total_ = 0;
  std::vector<std::map<NGram, long>> counts_;
};

inline InfoTable build_info_table(std::span<const std::string> corpus) {
  if (corpus.empty()) throw Error(ErrorCode::kEmptyCorpus, "info corpus is empty");
  InfoTable t;
  t.counts_.resize(kNistOrder);
  for (const auto& text : corpus) {
    const auto tokens = tokenize(text);
    t.unigram_total_ += static_cast<long>(tokens.size());
    for (int n = 1; n <= kNistOrder; ++n) {
      const auto grams = ngrams(tokens, n);
      for (const auto& [gram, c] : grams.counts()) {
        t.counts_[static_cast<std::size_t>(n - 1)][gram] += c;
      }
    }
  }
  t.built_ = true;
  return t;
}

/// Brevity factor exp(beta * ln^2(min(ratio, 1))), beta chosen so the factor
/// is 0.5 at ratio 2/3.
inline double nist_length_factor(double ratio) {
  static const double beta = std::log(0.5) / std::pow(std::log(2.0 / 3.0), 2);
  if (!(ratio < 1.0)) return 1.0;
  if (ratio <= 0.0) return 0.0;
  return std::exp(beta * std::pow(std::log(ratio), 2));
}

inline MetricResult nist(std::span<const std::string> candidate,
                         std::span<const TokenSequence> references, const InfoTable& info) {
  if (references.empty()) throw Error(ErrorCode::kEmptyReferences, "nist needs a reference");
  if (!info.built()) throw Error(ErrorCode::kUnbuiltInfoTable, "info table was never built");
  MetricResult r;
  double mean_ref = 0.0;
  for (const auto& ref : references) mean_ref += static_cast<double>(ref.size());
  mean_ref /= static_cast<double>(references.size());
  r.degenerate = candidate.empty() || mean_ref == 0.0;
  if (candidate.empty()) return r;

  double score = 0.0;
  for (int n = 1; n <= kNistOrder; ++n) {
    const auto cand = ngrams(candidate, n);
    if (cand.total() == 0) continue;
    std::vector<NGramMultiset> refs;
    for (const auto& ref : references) refs.push_back(ngrams(ref, n));
    double matched_info = 0.0;
    for (const auto& [gram, count] : cand.counts()) {
      int max_ref = 0;
      for (const auto& ref : refs) max_ref = std::max(max_ref, ref.count(gram));
      const int matched = std::min(count, max_ref);
      if (matched > 0) matched_info += matched * info.info(gram);
    }
    score += matched_info / cand.total();
  }
  const double ratio = mean_ref == 0.0 ? std::numeric_limits<double>::infinity()
                                       : static_cast<double>(candidate.size()) / mean_ref;
  r.value = score * nist_length_factor(ratio);
  return r;
}

inline MetricResult nist(std::string_view candidate, std::span<const std::string> references,
                         const InfoTable& info) {
  std::vector<TokenSequence> refs;
  for (const auto& ref : references) refs.push_back(tokenize(ref));
  return nist(tokenize(candidate), refs, info);
}

// ---------------------------------------------------------------------------
// Vector-space similarity over raw term counts

inline MetricResult cosine_similarity(std::span<const std::string> a,
                                      std::span<const std::string> b) {
  const auto [va, vb] = term_vectors(a, b);
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < va.counts.size(); ++i) {
    dot += static_cast<double>(va.counts[i]) * vb.counts[i];
    na += static_cast<double>(va.counts[i]) * va.counts[i];
    nb += static_cast<double>(vb.counts[i]) * vb.counts[i];
  }
  if (na == 0.0 || nb == 0.0) return {0.0, true};
  return {std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0), false};
}

inline MetricResult euclidean_distance(std::span<const std::string> a,
                                       std::span<const std::string> b) {
  const auto [va, vb] = term_vectors(a, b);
  double sum = 0.0;
  for (std::size_t i = 0; i < va.counts.size(); ++i) {
    const double d = static_cast<double>(va.counts[i]) - vb.counts[i];
    sum += d * d;
  }
  return {std::sqrt(sum), a.empty() || b.empty()};
}

inline MetricResult cosine_similarity(std::string_view a, std::string_view b) {
  return cosine_similarity(tokenize(a), tokenize(b));
}

inline MetricResult euclidean_distance(std::string_view a, std::string_view b) {
  return euclidean_distance(tokenize(a), tokenize(b));
}

}  // namespace ergoeval
