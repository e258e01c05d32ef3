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

// Porter (1980) suffix-stripping stemmer, original rule set. Tokens of one or
// two characters are returned unchanged, as in the reference C release.

#pragma once

#include <array>
#include <string>
#include <string_view>

namespace ergoeval {
namespace porter_detail {

class Stemmer {
 public:
  explicit Stemmer(std::string word) : w_(std::move(word)) {}

  std::string run() && {
    if (w_.size() <= 2) return std::move(w_);
    step1a();
    step1b();
    step1c();
    step2();
    step3();
    step4();
    step5();
    return std::move(w_);
  }

 private:
  struct Rule {
    std::string_view suffix;
    std::string_view replacement;
  };

  bool is_consonant(std::size_t i) const {
    switch (w_[i]) {
      case 'a': case 'e': case 'i': case 'o': case 'u': return false;
      case 'y': return i == 0 || !is_consonant(i - 1);
      default: return true;
    }
  }

  // Number of VC sequences in w_[0, len).
  int measure(std::size_t len) const {
    int m = 0;
    std::size_t i = 0;
    while (i < len && is_consonant(i)) ++i;
    while (i < len) {
      while (i < len && !is_consonant(i)) ++i;
      if (i >= len) break;
      while (i < len && is_consonant(i)) ++i;
      ++m;
    }
    return m;
  }

  bool has_vowel(std::size_t len) const {
    for (std::size_t i = 0; i < len; ++i) {
      if (!is_consonant(i)) return true;
    }
    return false;
  }

  bool double_consonant(std::size_t len) const {
    return len >= 2 && w_[len - 1] == w_[len - 2] && is_consonant(len - 1);
  }

  // *o: stem ends consonant-vowel-consonant, final consonant not w, x or y.
  bool cvc(std::size_t len) const {
    if (len < 3 || !is_consonant(len - 1) || is_consonant(len - 2) || !is_consonant(len - 3)) {
      return false;
    }
    const char c = w_[len - 1];
    return c != 'w' && c != 'x' && c != 'y';
  }

  bool ends_with(std::string_view s) const {
    return w_.size() >= s.size() && std::string_view(w_).substr(w_.size() - s.size()) == s;
  }

  std::size_t stem_len(std::string_view suffix) const { return w_.size() - suffix.size(); }

  void replace_suffix(std::string_view suffix, std::string_view replacement) {
    w_.resize(stem_len(suffix));
    w_.append(replacement);
  }

  void step1a() {
    if (ends_with("sses")) {
      replace_suffix("sses", "ss");
    } else if (ends_with("ies")) {
      replace_suffix("ies", "i");
    } else if (ends_with("ss")) {
      // unchanged
    } else if (ends_with("s")) {
      replace_suffix("s", "");
    }
  }

  void step1b() {
    if (ends_with("eed")) {
      if (measure(stem_len("eed")) > 0) replace_suffix("eed", "ee");
      return;
    }
    bool stripped = false;
    for (std::string_view suffix : {std::string_view("ed"), std::string_view("ing")}) {
      if (ends_with(suffix) && has_vowel(stem_len(suffix))) {
        replace_suffix(suffix, "");
        stripped = true;
        break;
      }
    }
    if (!stripped) return;
    if (ends_with("at") || ends_with("bl") || ends_with("iz")) {
      w_.push_back('e');
    } else if (double_consonant(w_.size())) {
      const char c = w_.back();
      if (c != 'l' && c != 's' && c != 'z') w_.pop_back();
    } else if (measure(w_.size()) == 1 && cvc(w_.size())) {
      w_.push_back('e');
    }
  }

  void step1c() {
    if (ends_with("y") && has_vowel(w_.size() - 1)) w_.back() = 'i';
  }

  void step2() {
    static constexpr std::array<Rule, 20> kRules{{
        {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"},   {"anci", "ance"},
        {"izer", "ize"},    {"abli", "able"},   {"alli", "al"},     {"entli", "ent"},
        {"eli", "e"},       {"ousli", "ous"},   {"ization", "ize"}, {"ation", "ate"},
        {"ator", "ate"},    {"alism", "al"},    {"iveness", "ive"}, {"fulness", "ful"},
        {"ousness", "ous"}, {"aliti", "al"},    {"iviti", "ive"},   {"biliti", "ble"},
    }};
    apply_longest(kRules);
  }

  void step3() {
    static constexpr std::array<Rule, 7> kRules{{
        {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"},
        {"ical", "ic"},  {"ful", ""},   {"ness", ""},
    }};
    apply_longest(kRules);
  }

  void step4() {
    static constexpr std::array<std::string_view, 19> kSuffixes{
        "al",  "ance", "ence", "er",  "ic",  "able", "ible", "ant", "ement", "ment",
        "ent", "ion",  "ou",   "ism", "ate", "iti",  "ous",  "ive", "ize"};
    std::string_view best;
    for (auto s : kSuffixes) {
      if (ends_with(s) && s.size() > best.size()) best = s;
    }
    if (best.empty()) return;
    const auto len = stem_len(best);
    if (measure(len) <= 1) return;
    if (best == "ion" && (len == 0 || (w_[len - 1] != 's' && w_[len - 1] != 't'))) return;
    w_.resize(len);
  }

  void step5() {
    if (ends_with("e")) {
      const auto len = w_.size() - 1;
      const int m = measure(len);
      if (m > 1 || (m == 1 && !cvc(len))) w_.pop_back();
    }
    if (measure(w_.size()) > 1 && double_consonant(w_.size()) && w_.back() == 'l') w_.pop_back();
  }

  // Longest matching suffix wins; it is replaced only when the remaining stem
  // has measure > 0, and no shorter rule is tried otherwise.
  template <std::size_t N>
  void apply_longest(const std::array<Rule, N>& rules) {
    const Rule* best = nullptr;
    for (const auto& r : rules) {
      if (ends_with(r.suffix) && (best == nullptr || r.suffix.size() > best->suffix.size())) {
        best = &r;
      }
    }
    if (best != nullptr && measure(stem_len(best->suffix)) > 0) {
      replace_suffix(best->suffix, best->replacement);
    }
  }

  std::string w_;
};

}  // namespace porter_detail

/// Porter stem of a lowercase token. Not idempotent in general.
inline std::string stem(std::string token) {
  return porter_detail::Stemmer(std::move(token)).run();
}

}  // namespace ergoeval
