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

// METEOR with exact and Porter-stem matching stages (no synonym stage).
//
// Two tokens can be aligned when their stems agree; an exact surface match is
// a special case. The alignment is a one-to-one matching that
//   1. has maximum cardinality,
//   2. among those, has the fewest chunks,
//   3. among those, has the most exact (surface) matches,
//   4. among those, is lexicographically smallest in reference positions.
// A chunk is a maximal run of aligned pairs adjacent in both texts.

#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ergoeval/metrics.hpp"
#include "ergoeval/porter_stemmer.hpp"
#include "ergoeval/textproc.hpp"

namespace ergoeval {

inline constexpr int kUnaligned = -1;

struct MeteorAlignment {
  int matches = 0;
  int chunks = 0;
  int exact_matches = 0;
  /// Reference position aligned to each candidate position, or kUnaligned.
  std::vector<int> reference_of;
  /// False when the search hit its node budget and returned the best found.
  bool exhaustive = true;
};

struct MeteorParams {
  double alpha = 0.9;
  double beta = 3.0;
  double gamma = 0.5;
};

struct MeteorScore {
  double value = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double fmean = 0.0;
  double penalty = 0.0;
  bool degenerate = false;
  MeteorAlignment alignment;
};

/// Chunk count of an alignment given as reference positions per candidate.
inline int count_chunks(std::span<const int> reference_of) {
  int chunks = 0;
  for (std::size_t i = 0; i < reference_of.size(); ++i) {
    if (reference_of[i] == kUnaligned) continue;
    const bool continues = i > 0 && reference_of[i - 1] != kUnaligned &&
                           reference_of[i - 1] + 1 == reference_of[i];
    if (!continues) ++chunks;
  }
  return chunks;
}

namespace meteor_detail {

class AlignmentSearch {
 public:
  AlignmentSearch(std::span<const std::string> candidate, std::span<const std::string> reference,
                  std::uint64_t node_budget)
      : cand_(candidate), ref_(reference), budget_(node_budget) {
    std::map<std::string, int> class_ids;
    auto class_of = [&](const std::string& token) {
      auto [it, inserted] = class_ids.emplace(stem(token), static_cast<int>(class_ids.size()));
      return it->second;
    };
    for (const auto& t : cand_) cand_class_.push_back(class_of(t));
    for (const auto& t : ref_) ref_class_.push_back(class_of(t));
    const auto classes = class_ids.size();

    std::vector<int> cand_count(classes, 0), ref_count(classes, 0);
    for (int c : cand_class_) ++cand_count[static_cast<std::size_t>(c)];
    for (int c : ref_class_) ++ref_count[static_cast<std::size_t>(c)];
    need_.resize(classes);
    for (std::size_t c = 0; c < classes; ++c) {
      need_[c] = std::min(cand_count[c], ref_count[c]);
      target_ += need_[c];
    }
    // Occurrences of each candidate position's class strictly after it.
    later_same_class_.assign(cand_.size(), 0);
    std::vector<int> seen(classes, 0);
    for (std::size_t i = cand_.size(); i-- > 0;) {
      auto& s = seen[static_cast<std::size_t>(cand_class_[i])];
      later_same_class_[i] = s;
      ++s;
    }
    ref_by_class_.resize(classes);
    for (std::size_t j = 0; j < ref_.size(); ++j) {
      ref_by_class_[static_cast<std::size_t>(ref_class_[j])].push_back(static_cast<int>(j));
    }
  }

  MeteorAlignment run() {
    current_.assign(cand_.size(), kUnaligned);
    used_.assign(ref_.size(), false);
    seed_with_greedy();
    if (target_ > 0) dfs(0, 0, 0, 0);
    MeteorAlignment out;
    out.reference_of = best_;
    out.matches = target_;
    out.chunks = best_chunks_;
    out.exact_matches = best_exact_;
    out.exhaustive = !budget_exhausted_;
    return out;
  }

 private:
  bool is_exact(std::size_t i, int j) const { return cand_[i] == ref_[static_cast<std::size_t>(j)]; }

  // Lexicographic key (chunks asc, exact desc, positions asc).
  bool better_than_best(int chunks, int exact) const {
    if (chunks != best_chunks_) return chunks < best_chunks_;
    if (exact != best_exact_) return exact > best_exact_;
    for (std::size_t i = 0; i < current_.size(); ++i) {
      const auto a = static_cast<unsigned>(current_[i]);  // kUnaligned sorts last
      const auto b = static_cast<unsigned>(best_[i]);
      if (a != b) return a < b;
    }
    return false;
  }

  void record(int chunks, int exact) {
    if (best_.empty() || better_than_best(chunks, exact)) {
      best_ = current_;
      best_chunks_ = chunks;
      best_exact_ = exact;
    }
  }

  // Left-to-right: continue the current chunk when possible, otherwise take
  // the free same-class reference starting the longest run.
  void seed_with_greedy() {
    std::vector<bool> used(ref_.size(), false);
    std::vector<int> assign(cand_.size(), kUnaligned);
    for (std::size_t i = 0; i < cand_.size(); ++i) {
      const auto& options = ref_by_class_[static_cast<std::size_t>(cand_class_[i])];
      int pick = kUnaligned;
      if (i > 0 && assign[i - 1] != kUnaligned) {
        const int next = assign[i - 1] + 1;
        if (next < static_cast<int>(ref_.size()) && !used[static_cast<std::size_t>(next)] &&
            ref_class_[static_cast<std::size_t>(next)] == cand_class_[i]) {
          pick = next;
        }
      }
      if (pick == kUnaligned) {
        int best_run = -1;
        for (int j : options) {
          if (used[static_cast<std::size_t>(j)]) continue;
          int run = 0;
          while (i + static_cast<std::size_t>(run) + 1 < cand_.size() &&
                 j + run + 1 < static_cast<int>(ref_.size()) &&
                 !used[static_cast<std::size_t>(j + run + 1)] &&
                 cand_class_[i + static_cast<std::size_t>(run) + 1] ==
                     ref_class_[static_cast<std::size_t>(j + run + 1)]) {
            ++run;
          }
          if (run > best_run) {
            best_run = run;
            pick = j;
          }
        }
      }
      if (pick != kUnaligned) {
        assign[i] = pick;
        used[static_cast<std::size_t>(pick)] = true;
      }
    }
    current_ = assign;
    int exact = 0;
    for (std::size_t i = 0; i < assign.size(); ++i) {
      if (assign[i] != kUnaligned && is_exact(i, assign[i])) ++exact;
    }
    record(count_chunks(assign), exact);
    current_.assign(cand_.size(), kUnaligned);
  }

  void dfs(std::size_t i, int matched, int chunks, int exact) {
    if (++nodes_ > budget_) {
      budget_exhausted_ = true;
      return;
    }
    if (matched == target_) {
      record(chunks, exact);
      return;
    }
    if (i >= cand_.size() || chunks > best_chunks_) return;
    // With the previous position unaligned, the next match opens a chunk.
    const bool prev_aligned = i > 0 && current_[i - 1] != kUnaligned;
    if (!prev_aligned && chunks + 1 > best_chunks_) return;

    const auto cls = static_cast<std::size_t>(cand_class_[i]);
    if (need_[cls] > 0) {
      for (int j : ref_by_class_[cls]) {
        if (used_[static_cast<std::size_t>(j)]) continue;
        const bool continues = prev_aligned && current_[i - 1] + 1 == j;
        const int next_chunks = chunks + (continues ? 0 : 1);
        if (next_chunks > best_chunks_) continue;
        used_[static_cast<std::size_t>(j)] = true;
        current_[i] = j;
        --need_[cls];
        dfs(i + 1, matched + 1, next_chunks, exact + (is_exact(i, j) ? 1 : 0));
        ++need_[cls];
        current_[i] = kUnaligned;
        used_[static_cast<std::size_t>(j)] = false;
        if (budget_exhausted_) return;
      }
    }
    // Leaving i unaligned is allowed only if later positions of its class can
    // still meet the class quota.
    if (need_[cls] <= later_same_class_[i]) dfs(i + 1, matched, chunks, exact);
  }

  std::span<const std::string> cand_;
  std::span<const std::string> ref_;
  std::uint64_t budget_;
  std::uint64_t nodes_ = 0;
  bool budget_exhausted_ = false;

  std::vector<int> cand_class_, ref_class_;
  std::vector<std::vector<int>> ref_by_class_;
  std::vector<int> need_;
  std::vector<int> later_same_class_;
  int target_ = 0;

  std::vector<int> current_;
  std::vector<bool> used_;
  std::vector<int> best_;
  int best_chunks_ = std::numeric_limits<int>::max();
  int best_exact_ = 0;
};

}  // namespace meteor_detail

inline constexpr std::uint64_t kMeteorNodeBudget = 2'000'000;

inline MeteorAlignment align_meteor(std::span<const std::string> candidate,
                                    std::span<const std::string> reference,
                                    std::uint64_t node_budget = kMeteorNodeBudget) {
  return meteor_detail::AlignmentSearch(candidate, reference, node_budget).run();
}

inline MeteorScore meteor(std::span<const std::string> candidate,
                          std::span<const std::string> reference, const MeteorParams& params = {}) {
  MeteorScore s;
  s.degenerate = candidate.empty() || reference.empty();
  s.alignment = align_meteor(candidate, reference);
  const int m = s.alignment.matches;
  if (m == 0) return s;
  s.precision = static_cast<double>(m) / static_cast<double>(candidate.size());
  s.recall = static_cast<double>(m) / static_cast<double>(reference.size());
  s.fmean = s.precision * s.recall /
            (params.alpha * s.precision + (1.0 - params.alpha) * s.recall);
  s.penalty = params.gamma * std::pow(static_cast<double>(s.alignment.chunks) / m, params.beta);
  s.value = s.fmean * (1.0 - s.penalty);
  return s;
}

inline MeteorScore meteor(std::string_view candidate, std::string_view reference) {
  return meteor(tokenize(candidate), tokenize(reference));
}

}  // namespace ergoeval
