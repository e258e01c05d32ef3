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

// SPICE-lite: F1 over scene tuples pulled out of each caption by a small
// rule-based tagger instead of a dependency parser.
//
// Tagging, per token, first rule wins:
//   * one-character tokens, digits, closed-class words and "-ly" adverbs are
//     function words;
//   * a token whose stem is in the verb lexicon is a verb, unless it follows
//     a determiner ("the work", "a lift");
//   * a past or present participle following an auxiliary is a verb;
//   * adjective lexicon entries and adjectival suffixes are adjectives;
//   * everything else is a noun.
// Tuples: every noun gives (noun); an adjective directly before a noun gives
// (noun, adjective); a verb with a noun somewhere before and after it in the
// same clause gives (nearest noun before, verb, nearest noun after). Clauses
// end at sentence punctuation and at subordinating conjunctions. Every tuple
// element is a Porter stem.

#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "ergoeval/metrics.hpp"
#include "ergoeval/porter_stemmer.hpp"
#include "ergoeval/textproc.hpp"

namespace ergoeval {

/// One to three stemmed elements: (object), (object, attribute) or
/// (subject, relation, object).
using SceneTuple = std::vector<std::string>;
using TupleSet = std::set<SceneTuple>;

namespace spice_detail {

enum class Tag { kFunction, kNoun, kVerb, kAdjective };

inline const std::unordered_set<std::string_view>& determiners() {
  static const std::unordered_set<std::string_view> kWords{
      "the", "a", "an", "this", "that", "these", "those", "his", "her", "its", "their",
      "our", "my", "your", "some", "any", "each", "every", "both", "either", "neither",
      "no", "all", "another", "such"};
  return kWords;
}

inline const std::unordered_set<std::string_view>& auxiliaries() {
  static const std::unordered_set<std::string_view> kWords{
      "is", "are", "was", "were", "be", "been", "being", "am", "has", "have", "had",
      "do", "does", "did", "will", "would", "can", "could", "should", "may", "might",
      "must", "shall", "appears", "seems", "gets", "get"};
  return kWords;
}

inline const std::unordered_set<std::string_view>& clause_breakers() {
  static const std::unordered_set<std::string_view> kWords{
      "because", "while", "although", "though", "if", "when", "whereas", "since",
      "unless", "which", "who", "whom", "whose", "where", "but", "so"};
  return kWords;
}

inline const std::unordered_set<std::string_view>& function_words() {
  static const std::unordered_set<std::string_view> kWords{
      // pronouns
      "he", "she", "it", "they", "we", "i", "you", "him", "them", "us", "me", "what",
      "himself", "herself", "themselves", "itself", "one", "someone", "something",
      // prepositions
      "in", "on", "at", "of", "for", "with", "by", "from", "to", "into", "onto", "over",
      "under", "above", "below", "between", "behind", "near", "beside", "during",
      "through", "across", "along", "around", "against", "toward", "towards", "upon",
      "within", "without", "about", "off", "up", "down", "out", "as", "than", "like",
      "via", "while",
      // conjunctions and particles
      "and", "or", "nor", "yet", "not", "very", "too", "also", "there", "here", "then",
      "just", "only", "more", "most", "less", "much", "many", "few", "due", "that",
      "yes", "no", "well", "however", "therefore", "thus"};
  return kWords;
}

inline const std::unordered_set<std::string>& verb_stems() {
  static const std::unordered_set<std::string> kStems = [] {
    std::unordered_set<std::string> out;
    for (std::string_view v :
         {"lift", "carry", "bend", "hold", "use", "stand", "kneel", "reach", "squat", "twist",
          "lean", "climb", "push", "pull", "install", "cut", "drill", "sit", "wear", "operate",
          "lay", "weld", "paint", "hammer", "move", "pick", "place", "expose", "maintain",
          "perform", "raise", "lower", "grab", "crouch", "walk", "handle", "work", "look",
          "cause", "lead", "increase", "strain", "put", "load", "unload", "dig", "shovel",
          "saw", "measure", "assemble", "fix", "repair", "build", "tie", "attach", "adjust",
          "secure", "balance", "stretch", "extend", "rotate", "turn", "support", "prepare",
          "pour", "spread", "mix", "stack", "sort", "clean", "sweep", "bear", "apply", "press",
          "grip", "drive", "tighten", "screw", "nail", "plaster", "inspect", "face", "keep"}) {
      out.insert(stem(std::string(v)));
    }
    return out;
  }();
  return kStems;
}

inline const std::unordered_set<std::string_view>& adjectives() {
  static const std::unordered_set<std::string_view> kWords{
      "tall", "short", "heavy", "light", "high", "low", "awkward", "static", "dynamic",
      "bent", "straight", "neutral", "safe", "unsafe", "risky", "prolonged", "long",
      "extended", "forward", "backward", "upright", "elevated", "overhead", "raised",
      "twisted", "stable", "unstable", "small", "large", "big", "tight", "red", "blue",
      "yellow", "orange", "green", "white", "black", "gray", "grey", "hard", "soft",
      "young", "old", "full", "wooden", "metal", "electric", "manual", "physical",
      "postural", "excessive", "significant", "potential", "constant", "sustained",
      "severe", "mild", "moderate", "poor", "good", "proper", "improper", "correct",
      "incorrect", "same", "different", "other", "certain", "upper", "lower", "lumbar",
      "deep", "flat", "narrow", "wide", "sharp", "new", "hot", "cold"};
  return kWords;
}

inline bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() > suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

inline bool has_adjective_suffix(std::string_view t) {
  for (std::string_view suffix : {"ous", "ful", "ive", "able", "ible", "less", "ic", "ical"}) {
    if (ends_with(t, suffix) && t.size() >= suffix.size() + 3) return true;
  }
  return false;
}

inline bool is_digit_token(std::string_view t) {
  for (char c : t) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

inline std::vector<Tag> tag(const TokenSequence& tokens) {
  std::vector<Tag> tags(tokens.size(), Tag::kNoun);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& t = tokens[i];
    const std::string_view prev = i > 0 ? std::string_view(tokens[i - 1]) : std::string_view();
    if (t.size() <= 1 || is_digit_token(t) || determiners().contains(t) ||
        auxiliaries().contains(t) || function_words().contains(t) ||
        clause_breakers().contains(t) || (ends_with(t, "ly") && t.size() > 4)) {
      tags[i] = Tag::kFunction;
    } else if (verb_stems().contains(stem(t)) && !determiners().contains(prev)) {
      tags[i] = Tag::kVerb;
    } else if (auxiliaries().contains(prev) && (ends_with(t, "ing") || ends_with(t, "ed"))) {
      tags[i] = Tag::kVerb;
    } else if (adjectives().contains(t) || has_adjective_suffix(t)) {
      tags[i] = Tag::kAdjective;
    }
  }
  return tags;
}

/// Splits raw text on sentence punctuation before tokenizing.
inline std::vector<TokenSequence> split_punctuated(std::string_view text) {
  std::vector<TokenSequence> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || std::string_view(".,;:!?\n").find(text[i]) != std::string_view::npos) {
      auto tokens = tokenize(text.substr(start, i - start));
      if (!tokens.empty()) out.push_back(std::move(tokens));
      start = i + 1;
    }
  }
  return out;
}

}  // namespace spice_detail

inline TupleSet extract_tuples(std::string_view text) {
  using spice_detail::Tag;
  TupleSet tuples;
  for (const auto& segment : spice_detail::split_punctuated(text)) {
    const auto tags = spice_detail::tag(segment);
    // Clause index per token, bumped at subordinating words.
    std::vector<int> clause(segment.size(), 0);
    int current = 0;
    for (std::size_t i = 0; i < segment.size(); ++i) {
      if (spice_detail::clause_breakers().contains(segment[i])) ++current;
      clause[i] = current;
    }
    for (std::size_t i = 0; i < segment.size(); ++i) {
      if (tags[i] == Tag::kNoun) {
        tuples.insert({stem(segment[i])});
        if (i > 0 && tags[i - 1] == Tag::kAdjective) {
          tuples.insert({stem(segment[i]), stem(segment[i - 1])});
        }
      } else if (tags[i] == Tag::kVerb) {
        std::optional<std::size_t> subject, object;
        for (std::size_t k = i; k-- > 0 && clause[k] == clause[i];) {
          if (tags[k] == Tag::kNoun) {
            subject = k;
            break;
          }
        }
        for (std::size_t k = i + 1; k < segment.size() && clause[k] == clause[i]; ++k) {
          if (tags[k] == Tag::kNoun) {
            object = k;
            break;
          }
        }
        if (subject && object) {
          tuples.insert({stem(segment[*subject]), stem(segment[i]), stem(segment[*object])});
        }
      }
    }
  }
  return tuples;
}

/// F1 between tuple sets; 0 (degenerate) when both are empty.
inline MetricResult tuple_f1(const TupleSet& candidate, const TupleSet& reference) {
  if (candidate.empty() && reference.empty()) return {0.0, true};
  std::size_t common = 0;
  for (const auto& t : candidate) common += reference.count(t);
  const double f1 = 2.0 * static_cast<double>(common) /
                    static_cast<double>(candidate.size() + reference.size());
  return {f1, candidate.empty() || reference.empty()};
}

inline MetricResult spice_lite(std::string_view candidate, std::string_view reference) {
  return tuple_f1(extract_tuples(candidate), extract_tuples(reference));
}

}  // namespace ergoeval
