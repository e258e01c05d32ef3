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

// Shared fixtures for the test suites: scratch directories, synthetic
// datasets and hand-rolled random generators.

#pragma once

#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ergoeval/ergoeval.hpp"

namespace ergoeval::testing {

namespace fs = std::filesystem;

/// Unique scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::uint64_t counter = 0;
    SeededRng rng(static_cast<std::uint64_t>(::getpid()) * 1000003u + counter++);
    path_ = fs::temp_directory_path() / ("ergoeval-test-" + std::to_string(rng.next()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline const std::vector<std::string>& word_bank() {
  static const std::vector<std::string> kWords{
      "the", "worker", "is", "lifting", "a", "heavy", "panel", "with", "his", "back",
      "bent", "kneeling", "on", "floor", "arms", "raised", "above", "shoulders", "risk",
      "exposed", "posture", "awkward", "standing", "upright", "carrying", "bricks", "drill",
      "overhead", "neck", "flexed", "knees", "twisting", "trunk", "shoveling", "soil"};
  return kWords;
}

/// Random token sequence of length in [min_len, max_len] drawn from `alphabet`.
inline TokenSequence random_tokens(SeededRng& rng, const std::vector<std::string>& alphabet,
                                   std::size_t min_len, std::size_t max_len) {
  const auto len = min_len + rng.below(max_len - min_len + 1);
  TokenSequence out;
  for (std::size_t i = 0; i < len; ++i) out.push_back(alphabet[rng.below(alphabet.size())]);
  return out;
}

inline std::string join(const TokenSequence& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

inline std::string random_sentence(SeededRng& rng, std::size_t min_len = 1,
                                   std::size_t max_len = 12) {
  return join(random_tokens(rng, word_bank(), min_len, max_len));
}

inline const std::vector<std::string>& risky_captions() {
  static const std::vector<std::string> kTexts{
      "The worker is kneeling on the floor with his back bent and is exposed to ergonomic risks.",
      "A worker is lifting a heavy panel with his arms raised above the shoulders, which is an awkward posture.",
      "The worker is bending forward to tie rebar with his trunk flexed and is exposed to postural risks.",
      "The worker is working overhead with his neck extended and arms raised, an awkward posture.",
      "A construction worker is squatting with both knees bent while carrying bricks, exposing him to risks."};
  return kTexts;
}

inline const std::vector<std::string>& safe_captions() {
  static const std::vector<std::string> kTexts{
      "The worker is standing upright with a neutral posture and is not exposed to ergonomic risks.",
      "A worker is walking on the site with a straight back, which is a neutral posture.",
      "The worker is measuring a board at waist height with a neutral back and is not exposed to risks.",
      "The worker is standing and holding a light tool close to his body in a neutral posture.",
      "A construction worker is standing upright while talking, with no awkward posture."};
  return kTexts;
}

/// Valid dataset of `n_images` images, each with 1..max_captions captions
/// and, when `with_vqa`, one VQA annotation. Deterministic in `seed`.
inline Dataset synthetic_dataset(std::size_t n_images, std::uint64_t seed,
                                 int max_captions = 2, bool with_vqa = true,
                                 bool random_text = false) {
  SeededRng rng(seed);
  std::vector<ImageRecord> images;
  std::vector<AnnotationRecord> annotations;
  AnnotationId next_annotation = 1;
  for (std::size_t i = 0; i < n_images; ++i) {
    const ImageId id = static_cast<ImageId>(i + 1);
    ImageRecord img{id, "img_" + std::to_string(id) + ".jpg", std::nullopt, std::nullopt};
    if (rng.coin()) {
      img.width = 1 + static_cast<int>(rng.below(4096));
      img.height = 1 + static_cast<int>(rng.below(4096));
    }
    images.push_back(img);
    const bool risky = rng.coin();
    auto level = [&]() -> std::optional<RiskLevel> {
      switch (rng.below(3)) {
        case 0: return std::nullopt;
        case 1: return risky ? RiskLevel::kMedium : RiskLevel::kLow;
        default: return risky ? (rng.coin() ? RiskLevel::kHigh : RiskLevel::kVeryHigh)
                              : RiskLevel::kNegligible;
      }
    };
    const int captions = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_captions)));
    for (int c = 0; c < captions; ++c) {
      const auto& bank = risky ? risky_captions() : safe_captions();
      std::string text = random_text ? random_sentence(rng) : bank[rng.below(bank.size())];
      annotations.push_back({next_annotation++, id, Task::kCaption, text, risky, level()});
    }
    if (with_vqa) {
      annotations.push_back(
          {next_annotation++, id, Task::kVqa, risky ? "yes" : "no", risky, level()});
    }
  }
  return Dataset::create(std::move(images), std::move(annotations));
}

/// Writes a small distinct byte payload for every image of `d` under `root`.
inline void write_fake_images(const Dataset& d, const fs::path& root) {
  fs::create_directories(root);
  for (const auto& img : d.images()) {
    write_file(root / img.file_name, "JPEGDATA:" + img.file_name);
  }
}

}  // namespace ergoeval::testing
