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

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ergoeval/error.hpp"

namespace ergoeval {

/// Lowercase word tokens. Never contains empty tokens or whitespace.
using TokenSequence = std::vector<std::string>;
using NGram = std::vector<std::string>;

/// Splits on every code point that is not a Unicode letter or digit and
/// lowercases what remains. Malformed UTF-8 bytes act as separators.
inline TokenSequence tokenize(std::string_view text) {
  TokenSequence tokens;
  std::string current;
  const auto* s = reinterpret_cast<const std::uint8_t*>(text.data());
  const auto length = static_cast<std::int32_t>(text.size());
  std::int32_t i = 0;
  while (i < length) {
    UChar32 c;
    U8_NEXT(s, i, length, c);
    if (c >= 0 && u_isalnum(c)) {
      const UChar32 lower = u_tolower(c);
      std::uint8_t buf[U8_MAX_LENGTH];
      std::int32_t n = 0;
      U8_APPEND_UNSAFE(buf, n, lower);
      current.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(n));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

/// Multiset of n-grams of a single order.
class NGramMultiset {
 public:
  explicit NGramMultiset(int order) : order_(order) {}

  int order() const { return order_; }
  const std::map<NGram, int>& counts() const { return counts_; }

  int count(const NGram& gram) const {
    auto it = counts_.find(gram);
    return it == counts_.end() ? 0 : it->second;
  }

  /// Sum of all multiplicities.
  int total() const { return total_; }

  void add(NGram gram, int n = 1) {
    counts_[std::move(gram)] += n;
    total_ += n;
  }

  friend bool operator==(const NGramMultiset&, const NGramMultiset&) = default;

 private:
  int order_;
  int total_ = 0;
  std::map<NGram, int> counts_;
};

/// Sliding-window n-gram extraction; yields max(0, |tokens| - n + 1) grams.
inline NGramMultiset ngrams(std::span<const std::string> tokens, int n) {
  if (n < 1) throw Error(ErrorCode::kInvalidOrder, "n-gram order must be >= 1");
  NGramMultiset out(n);
  const auto order = static_cast<std::size_t>(n);
  for (std::size_t i = 0; i + order <= tokens.size(); ++i) {
    out.add(NGram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                  tokens.begin() + static_cast<std::ptrdiff_t>(i + order)));
  }
  return out;
}

struct TermVector {
  std::vector<std::string> vocabulary;  // sorted, unique
  std::vector<int> counts;

  friend bool operator==(const TermVector&, const TermVector&) = default;
};

/// Raw frequency vectors of `a` and `b` over their shared sorted vocabulary.
inline std::pair<TermVector, TermVector> term_vectors(std::span<const std::string> a,
                                                      std::span<const std::string> b) {
  std::map<std::string, std::pair<int, int>> merged;
  for (const auto& t : a) ++merged[t].first;
  for (const auto& t : b) ++merged[t].second;
  TermVector va, vb;
  va.vocabulary.reserve(merged.size());
  for (const auto& [term, c] : merged) {
    va.vocabulary.push_back(term);
    va.counts.push_back(c.first);
    vb.counts.push_back(c.second);
  }
  vb.vocabulary = va.vocabulary;
  return {std::move(va), std::move(vb)};
}

}  // namespace ergoeval
