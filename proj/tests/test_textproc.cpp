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

#include <gtest/gtest.h>

#include "support.hpp"

namespace ergoeval {
namespace {

TEST(Tokenize, LowercasesAndSplitsOnPunctuation) {
  EXPECT_EQ(tokenize("The worker's BACK is bent."),
            (TokenSequence{"the", "worker", "s", "back", "is", "bent"}));
  EXPECT_EQ(tokenize("  lifting\tpanels\n(heavy)  "),
            (TokenSequence{"lifting", "panels", "heavy"}));
  EXPECT_EQ(tokenize("REBA-score 11"), (TokenSequence{"reba", "score", "11"}));
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_TRUE(tokenize("?!., ;").empty());
}

TEST(Tokenize, UnicodeLettersAndMalformedBytes) {
  EXPECT_EQ(tokenize("Ärger ÜBER café"), (TokenSequence{"ärger", "über", "café"}));
  EXPECT_EQ(tokenize("bad\xff" "byte"), (TokenSequence{"bad", "byte"}));
  EXPECT_EQ(tokenize("a\xe2\x80\x94" "b"), (TokenSequence{"a", "b"}));  // dash separates
}

TEST(Tokenize, TokensAreNonEmptyWithoutWhitespace) {
  SeededRng rng(5);
  const std::string alphabet = "aB3 .,\t\n-'xYz";
  for (int trial = 0; trial < 500; ++trial) {
    std::string text;
    const auto len = rng.below(40);
    for (std::uint64_t i = 0; i < len; ++i) text += alphabet[rng.below(alphabet.size())];
    for (const auto& t : tokenize(text)) {
      EXPECT_FALSE(t.empty());
      EXPECT_EQ(t.find_first_of(" \t\n.,-'"), std::string::npos);
      for (char c : t) EXPECT_FALSE(c >= 'A' && c <= 'Z');
    }
  }
}

TEST(NGrams, SlidingWindow) {
  const TokenSequence t{"a", "b", "a", "b"};
  const auto bi = ngrams(t, 2);
  EXPECT_EQ(bi.total(), 3);
  EXPECT_EQ(bi.count({"a", "b"}), 2);
  EXPECT_EQ(bi.count({"b", "a"}), 1);
  EXPECT_EQ(ngrams(t, 5).total(), 0);
  EXPECT_EQ(ngrams(TokenSequence{}, 1).total(), 0);
}

TEST(NGrams, RejectsNonPositiveOrder) {
  const TokenSequence t{"a"};
  try {
    ngrams(t, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidOrder);
  }
}

TEST(NGrams, CountsProperty) {
  SeededRng rng(11);
  const std::vector<std::string> alphabet{"x", "y", "z"};
  for (int trial = 0; trial < 300; ++trial) {
    const auto t = testing::random_tokens(rng, alphabet, 0, 10);
    for (int n = 1; n <= 4; ++n) {
      const auto g = ngrams(t, n);
      const int expected = std::max(0, static_cast<int>(t.size()) - n + 1);
      EXPECT_EQ(g.total(), expected);
      int sum = 0;
      for (const auto& [gram, c] : g.counts()) {
        EXPECT_EQ(static_cast<int>(gram.size()), n);
        EXPECT_GE(c, 1);
        sum += c;
      }
      EXPECT_EQ(sum, expected);
    }
  }
}

TEST(TermVectors, SharedSortedVocabulary) {
  const TokenSequence a{"b", "a", "b"};
  const TokenSequence b{"c", "a"};
  const auto [va, vb] = term_vectors(a, b);
  EXPECT_EQ(va.vocabulary, (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(vb.vocabulary, va.vocabulary);
  EXPECT_EQ(va.counts, (std::vector<int>{1, 2, 0}));
  EXPECT_EQ(vb.counts, (std::vector<int>{1, 0, 1}));
}

}  // namespace
}  // namespace ergoeval
