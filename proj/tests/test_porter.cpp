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

#include <utility>

#include "ergoeval/porter_stemmer.hpp"

namespace ergoeval {
namespace {

// Reference outputs of an independent implementation of the original Porter
// algorithm, frozen here.
const std::vector<std::pair<std::string, std::string>>& frozen_vocabulary() {
  static const std::vector<std::pair<std::string, std::string>> kPairs{
      {"running", "run"}, {"ergonomic", "ergonom"}, {"a", "a"}, {"caresses", "caress"},
      {"ponies", "poni"}, {"ties", "ti"}, {"caress", "caress"}, {"cats", "cat"},
      {"feed", "feed"}, {"agreed", "agre"}, {"plastered", "plaster"}, {"bled", "bled"},
      {"motoring", "motor"}, {"sing", "sing"}, {"conflated", "conflat"}, {"troubled", "troubl"},
      {"sized", "size"}, {"hopping", "hop"}, {"tanned", "tan"}, {"falling", "fall"},
      {"hissing", "hiss"}, {"fizzed", "fizz"}, {"failing", "fail"}, {"filing", "file"},
      {"happy", "happi"}, {"sky", "sky"}, {"relational", "relat"}, {"conditional", "condit"},
      {"rational", "ration"}, {"valenci", "valenc"}, {"hesitanci", "hesit"},
      {"digitizer", "digit"}, {"conformabli", "conform"}, {"radicalli", "radic"},
      {"differentli", "differ"}, {"vileli", "vile"}, {"analogousli", "analog"},
      {"vietnamization", "vietnam"}, {"predication", "predic"}, {"operator", "oper"},
      {"feudalism", "feudal"}, {"decisiveness", "decis"}, {"hopefulness", "hope"},
      {"callousness", "callous"}, {"formaliti", "formal"}, {"sensitiviti", "sensit"},
      {"sensibiliti", "sensibl"}, {"triplicate", "triplic"}, {"formative", "form"},
      {"formalize", "formal"}, {"electriciti", "electr"}, {"electrical", "electr"},
      {"hopeful", "hope"}, {"goodness", "good"}, {"revival", "reviv"}, {"allowance", "allow"},
      {"inference", "infer"}, {"airliner", "airlin"}, {"gyroscopic", "gyroscop"},
      {"adjustable", "adjust"}, {"defensible", "defens"}, {"irritant", "irrit"},
      {"replacement", "replac"}, {"adjustment", "adjust"}, {"dependent", "depend"},
      {"adoption", "adopt"}, {"homologou", "homolog"}, {"communism", "commun"},
      {"activate", "activ"}, {"angulariti", "angular"}, {"homologous", "homolog"},
      {"effective", "effect"}, {"bowdlerize", "bowdler"}, {"probate", "probat"},
      {"rate", "rate"}, {"cease", "ceas"}, {"controll", "control"}, {"roll", "roll"},
      {"generalizations", "gener"}, {"oscillators", "oscil"}, {"worker", "worker"},
      {"workers", "worker"}, {"lifts", "lift"}, {"lifting", "lift"}, {"postures", "postur"},
      {"awkward", "awkward"}, {"bending", "bend"}, {"kneeling", "kneel"}, {"knees", "knee"},
      {"exposed", "expos"}, {"risks", "risk"}, {"construction", "construct"},
      {"overhead", "overhead"}, {"shoulders", "shoulder"}, {"generously", "gener"},
      {"ergonomics", "ergonom"}, {"feet", "feet"}, {"agreement", "agreement"}, {"y", "y"},
      {"by", "by"}, {"dying", "dy"}, {"lying", "ly"}, {"skies", "ski"}, {"news", "new"},
      {"organization", "organ"}, {"repeatedly", "repeatedli"}};
  return kPairs;
}

TEST(PorterStem, FrozenVocabulary) {
  for (const auto& [word, expected] : frozen_vocabulary()) {
    EXPECT_EQ(stem(word), expected) << word;
  }
}

TEST(PorterStem, ShortWordsUnchanged) {
  EXPECT_EQ(stem("is"), "is");
  EXPECT_EQ(stem("as"), "as");
  EXPECT_EQ(stem(""), "");
}

TEST(PorterStem, NonAlphabeticPassesThrough) {
  EXPECT_EQ(stem("2024"), "2024");
}

TEST(PorterStem, NeverLengthens) {
  for (const auto& [word, expected] : frozen_vocabulary()) {
    EXPECT_LE(stem(word).size(), word.size()) << word;
  }
}

}  // namespace
}  // namespace ergoeval
