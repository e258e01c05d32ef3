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

// Brute-force reference implementations used to cross-check the library.
// They favour obviously-correct enumeration over speed and share no code
// with the implementations under test.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace ergoeval::oracle {

using Tokens = std::vector<std::string>;

inline std::vector<Tokens> windows(const Tokens& t, std::size_t n) {
  std::vector<Tokens> out;
  for (std::size_t i = 0; i + n <= t.size(); ++i) out.emplace_back(t.begin() + i, t.begin() + i + n);
  return out;
}

inline int occurrences(const std::vector<Tokens>& list, const Tokens& g) {
  return static_cast<int>(std::count(list.begin(), list.end(), g));
}

/// (clipped matches, candidate n-gram count) at order n against several
/// references; clipping uses the largest count in any single reference.
inline std::pair<int, int> clipped(const Tokens& cand, const std::vector<Tokens>& refs,
                                   std::size_t n) {
  const auto cw = windows(cand, n);
  std::vector<std::vector<Tokens>> rw;
  for (const auto& r : refs) rw.push_back(windows(r, n));
  int matches = 0;
  std::vector<Tokens> done;
  for (const auto& g : cw) {
    if (std::find(done.begin(), done.end(), g) != done.end()) continue;
    done.push_back(g);
    int best = 0;
    for (const auto& r : rw) best = std::max(best, occurrences(r, g));
    matches += std::min(occurrences(cw, g), best);
  }
  return {matches, static_cast<int>(cw.size())};
}

/// Unigram overlap by greedily consuming reference tokens one at a time.
inline int consumed_overlap(const Tokens& cand, Tokens ref) {
  int overlap = 0;
  for (const auto& t : cand) {
    auto it = std::find(ref.begin(), ref.end(), t);
    if (it != ref.end()) {
      ++overlap;
      ref.erase(it);
    }
  }
  return overlap;
}

struct Alignment {
  int matches = 0;
  int chunks = 0;
};

/// Exhaustive search over every partial matching in which each candidate
/// token is either unaligned or paired with a distinct reference token that
/// `same` accepts. Returns the maximum match count and, among those, the
/// minimum chunk count.
inline Alignment exhaustive_alignment(
    const Tokens& cand, const Tokens& ref,
    const std::function<bool(const std::string&, const std::string&)>& same) {
  Alignment best{0, 0};
  bool found = false;
  std::vector<int> assign(cand.size(), -1);
  std::vector<bool> used(ref.size(), false);
  std::function<void(std::size_t)> go = [&](std::size_t i) {
    if (i == cand.size()) {
      int m = 0, chunks = 0;
      for (std::size_t k = 0; k < assign.size(); ++k) {
        if (assign[k] < 0) continue;
        ++m;
        if (k == 0 || assign[k - 1] < 0 || assign[k - 1] + 1 != assign[k]) ++chunks;
      }
      if (!found || m > best.matches || (m == best.matches && chunks < best.chunks)) {
        best = {m, chunks};
        found = true;
      }
      return;
    }
    go(i + 1);
    for (std::size_t j = 0; j < ref.size(); ++j) {
      if (used[j] || !same(cand[i], ref[j])) continue;
      used[j] = true;
      assign[i] = static_cast<int>(j);
      go(i + 1);
      assign[i] = -1;
      used[j] = false;
    }
  };
  go(0);
  return best;
}

}  // namespace ergoeval::oracle

namespace ergoeval::oracle {

/// Interpolated add-k n-gram log-likelihood computed by rescanning the raw
/// training sentences for every count. Sentences are already tokenized;
/// histories are padded with "<s>" and unseen words map to "<unk>".
inline double lm_log_likelihood(const std::vector<Tokens>& corpus, int order, double k,
                                const std::vector<double>& weights, const Tokens& text) {
  const auto pad = static_cast<std::size_t>(order - 1);
  auto padded = [&](const Tokens& s) {
    Tokens p(pad, "<s>");
    p.insert(p.end(), s.begin(), s.end());
    return p;
  };
  Tokens vocab{"<unk>"};
  for (const auto& s : corpus) {
    for (const auto& t : s) {
      if (std::find(vocab.begin(), vocab.end(), t) == vocab.end()) vocab.push_back(t);
    }
  }
  const double v = static_cast<double>(vocab.size());
  // Count of n-gram `g` ending at a real (non-padding) position.
  auto count = [&](const Tokens& g) {
    double c = 0;
    for (const auto& s : corpus) {
      const auto p = padded(s);
      for (std::size_t i = pad; i < p.size(); ++i) {
        if (i + 1 < g.size()) continue;
        if (std::equal(g.begin(), g.end(), p.begin() + static_cast<std::ptrdiff_t>(i + 1 - g.size()))) ++c;
      }
    }
    return c;
  };
  auto context_total = [&](const Tokens& ctx) {
    double c = 0;
    for (const auto& w : vocab) {
      Tokens g = ctx;
      g.push_back(w);
      c += count(g);
    }
    return c;
  };
  Tokens mapped;
  for (const auto& t : text) {
    mapped.push_back(std::find(vocab.begin(), vocab.end(), t) == vocab.end() ? "<unk>" : t);
  }
  const auto p = padded(mapped);
  double sum = 0.0;
  for (std::size_t i = pad; i < p.size(); ++i) {
    double prob = 0.0;
    for (int n = 1; n <= order; ++n) {
      Tokens ctx(p.begin() + static_cast<std::ptrdiff_t>(i + 1 - static_cast<std::size_t>(n)),
                 p.begin() + static_cast<std::ptrdiff_t>(i));
      Tokens g = ctx;
      g.push_back(p[i]);
      prob += weights[static_cast<std::size_t>(n - 1)] * (count(g) + k) /
              (context_total(ctx) + k * v);
    }
    sum += std::log(prob);
  }
  return sum;
}

}  // namespace ergoeval::oracle
