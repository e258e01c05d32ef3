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

// Image/annotation dataset in a COCO-caption style JSON layout:
//
//   {
//     "partition": "unsplit" | "fine_tune" | "test",        (optional)
//     "images": [{"id", "file_name", "width"?, "height"?}],
//     "annotations": [{"id", "image_id", "task": "caption" | "vqa", "text",
//                      "risk_exposed", "reba_level"?}]
//   }

#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ergoeval/error.hpp"
#include "ergoeval/random.hpp"
#include "json.hpp"

namespace ergoeval {

using ImageId = std::int64_t;
using AnnotationId = std::int64_t;

/// Five REBA outcome levels. Declaration order is the risk order.
enum class RiskLevel { kNegligible, kLow, kMedium, kHigh, kVeryHigh };

inline constexpr RiskLevel kRiskThreshold = RiskLevel::kMedium;

inline bool exceeds_threshold(RiskLevel level) { return level >= kRiskThreshold; }

inline std::string_view to_string(RiskLevel level) {
  switch (level) {
    case RiskLevel::kNegligible: return "negligible";
    case RiskLevel::kLow: return "low";
    case RiskLevel::kMedium: return "medium";
    case RiskLevel::kHigh: return "high";
    case RiskLevel::kVeryHigh: return "very_high";
  }
  return "";
}

inline std::optional<RiskLevel> parse_risk_level(std::string_view text) {
  for (auto level : {RiskLevel::kNegligible, RiskLevel::kLow, RiskLevel::kMedium,
                     RiskLevel::kHigh, RiskLevel::kVeryHigh}) {
    if (to_string(level) == text) return level;
  }
  return std::nullopt;
}

enum class Task { kCaption, kVqa };

/// The bracketed identifier that prefixes a prompt, "[caption]" or "[vqa]".
inline std::string_view task_token(Task task) {
  return task == Task::kCaption ? "[caption]" : "[vqa]";
}

inline std::optional<Task> parse_task_token(std::string_view token) {
  if (token == "[caption]") return Task::kCaption;
  if (token == "[vqa]") return Task::kVqa;
  return std::nullopt;
}

/// Name used in dataset and prediction files.
inline std::string_view task_name(Task task) {
  return task == Task::kCaption ? "caption" : "vqa";
}

inline std::optional<Task> parse_task_name(std::string_view name) {
  if (name == "caption") return Task::kCaption;
  if (name == "vqa") return Task::kVqa;
  return std::nullopt;
}

/// The fixed prompt sent to the model for each task.
inline std::string build_prompt(Task task) {
  if (task == Task::kVqa) {
    return "[vqa] Is the worker exposed to postural ergonomic risks?";
  }
  return "[caption]Describe the workers and their postures in the image and "
         "tell me if they are exposed to ergonomic risks due to their postures?";
}

struct ImageRecord {
  ImageId id = 0;
  std::string file_name;
  std::optional<int> width;
  std::optional<int> height;

  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

struct AnnotationRecord {
  AnnotationId id = 0;
  ImageId image_id = 0;
  Task task = Task::kCaption;
  std::string text;
  bool risk_exposed = false;
  std::optional<RiskLevel> reba_level;

  friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

enum class Partition { kUnsplit, kFineTune, kTest };

inline std::string_view to_string(Partition p) {
  switch (p) {
    case Partition::kUnsplit: return "unsplit";
    case Partition::kFineTune: return "fine_tune";
    case Partition::kTest: return "test";
  }
  return "";
}

inline std::optional<Partition> parse_partition(std::string_view text) {
  for (auto p : {Partition::kUnsplit, Partition::kFineTune, Partition::kTest}) {
    if (to_string(p) == text) return p;
  }
  return std::nullopt;
}

/// Validated, id-sorted collection of images and their annotations. Only
/// constructible through `Dataset::create`, which enforces every invariant,
/// so a Dataset value in hand is always consistent.
class Dataset {
 public:
  Dataset() = default;

  static Dataset create(std::vector<ImageRecord> images,
                        std::vector<AnnotationRecord> annotations,
                        Partition partition = Partition::kUnsplit) {
    Dataset d;
    d.images_ = std::move(images);
    d.annotations_ = std::move(annotations);
    d.partition_ = partition;
    std::sort(d.images_.begin(), d.images_.end(),
              [](const auto& a, const auto& b) { return a.id < b.id; });
    std::sort(d.annotations_.begin(), d.annotations_.end(),
              [](const auto& a, const auto& b) { return a.id < b.id; });
    d.validate();
    return d;
  }

  const std::vector<ImageRecord>& images() const { return images_; }
  const std::vector<AnnotationRecord>& annotations() const { return annotations_; }
  Partition partition() const { return partition_; }

  const ImageRecord* find_image(ImageId id) const {
    auto it = std::lower_bound(images_.begin(), images_.end(), id,
                               [](const ImageRecord& r, ImageId v) { return r.id < v; });
    return it != images_.end() && it->id == id ? &*it : nullptr;
  }

  /// Annotations of one task for one image, in id order.
  std::vector<const AnnotationRecord*> annotations_for(ImageId image, Task task) const {
    std::vector<const AnnotationRecord*> out;
    for (const auto& a : annotations_) {
      if (a.image_id == image && a.task == task) out.push_back(&a);
    }
    return out;
  }

  /// Ids of images carrying at least one annotation of `task`, ascending.
  std::vector<ImageId> images_with(Task task) const {
    std::set<ImageId> ids;
    for (const auto& a : annotations_) {
      if (a.task == task) ids.insert(a.image_id);
    }
    return {ids.begin(), ids.end()};
  }

  /// Image-level risk label. All annotations of an image agree on it.
  std::optional<bool> risk_label(ImageId image) const {
    for (const auto& a : annotations_) {
      if (a.image_id == image) return a.risk_exposed;
    }
    return std::nullopt;
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  void validate() const {
    ImageId prev_image = 0;
    for (std::size_t i = 0; i < images_.size(); ++i) {
      const auto& img = images_[i];
      if (i > 0 && img.id == prev_image) {
        throw Error(ErrorCode::kInvariantViolation,
                    "duplicate image id " + std::to_string(img.id), img.id);
      }
      prev_image = img.id;
      if (img.file_name.empty()) {
        throw Error(ErrorCode::kInvariantViolation,
                    "image " + std::to_string(img.id) + " has an empty file_name", img.id);
      }
      if ((img.width && *img.width <= 0) || (img.height && *img.height <= 0)) {
        throw Error(ErrorCode::kInvariantViolation,
                    "image " + std::to_string(img.id) + " has a non-positive size", img.id);
      }
    }

    std::map<ImageId, const AnnotationRecord*> first_of_image;
    std::set<ImageId> vqa_seen;
    for (std::size_t i = 0; i < annotations_.size(); ++i) {
      const auto& a = annotations_[i];
      const auto label = "annotation " + std::to_string(a.id);
      if (i > 0 && annotations_[i - 1].id == a.id) {
        throw Error(ErrorCode::kInvariantViolation, "duplicate " + label, a.id);
      }
      if (find_image(a.image_id) == nullptr) {
        throw Error(ErrorCode::kDanglingReference,
                    label + " references missing image " + std::to_string(a.image_id), a.id);
      }
      if (a.reba_level && exceeds_threshold(*a.reba_level) != a.risk_exposed) {
        throw Error(ErrorCode::kInvariantViolation,
                    label + ": risk_exposed contradicts reba_level " +
                        std::string(to_string(*a.reba_level)),
                    a.id);
      }
      if (a.task == Task::kVqa) {
        if (a.text != "yes" && a.text != "no") {
          throw Error(ErrorCode::kInvariantViolation,
                      label + ": vqa text must be \"yes\" or \"no\"", a.id);
        }
        if ((a.text == "yes") != a.risk_exposed) {
          throw Error(ErrorCode::kInvariantViolation,
                      label + ": vqa answer contradicts risk_exposed", a.id);
        }
        if (!vqa_seen.insert(a.image_id).second) {
          throw Error(ErrorCode::kInvariantViolation,
                      label + ": second vqa annotation for image " + std::to_string(a.image_id),
                      a.id);
        }
      } else if (a.text.empty()) {
        throw Error(ErrorCode::kInvariantViolation, label + ": empty caption", a.id);
      }
      auto [it, inserted] = first_of_image.emplace(a.image_id, &a);
      if (!inserted && it->second->risk_exposed != a.risk_exposed) {
        throw Error(ErrorCode::kInvariantViolation,
                    label + ": risk_exposed disagrees with annotation " +
                        std::to_string(it->second->id) + " of the same image",
                    a.id);
      }
    }
  }

  std::vector<ImageRecord> images_;
  std::vector<AnnotationRecord> annotations_;
  Partition partition_ = Partition::kUnsplit;
};

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key,
                                     const std::string& where,
                                     std::optional<std::int64_t> id = std::nullopt) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw Error(ErrorCode::kMalformedDocument, where + ": missing field \"" + key + "\"", id);
  }
  return *it;
}

inline std::optional<int> optional_dimension(const nlohmann::json& obj, const char* key,
                                             ImageId id) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_number_integer()) {
    throw Error(ErrorCode::kMalformedDocument,
                "image " + std::to_string(id) + ": \"" + key + "\" must be an integer", id);
  }
  return it->get<int>();
}

}  // namespace detail

inline Dataset dataset_from_json(const nlohmann::json& doc) {
  using detail::require;
  if (!doc.is_object()) {
    throw Error(ErrorCode::kMalformedDocument, "top-level value must be an object");
  }
  const auto& images_json = require(doc, "images", "document");
  const auto& annotations_json = require(doc, "annotations", "document");
  if (!images_json.is_array() || !annotations_json.is_array()) {
    throw Error(ErrorCode::kMalformedDocument, "\"images\" and \"annotations\" must be arrays");
  }

  Partition partition = Partition::kUnsplit;
  if (auto it = doc.find("partition"); it != doc.end()) {
    auto parsed = it->is_string() ? parse_partition(it->get<std::string>()) : std::nullopt;
    if (!parsed) throw Error(ErrorCode::kMalformedDocument, "unknown partition tag");
    partition = *parsed;
  }

  try {
    std::vector<ImageRecord> images;
    images.reserve(images_json.size());
    for (const auto& j : images_json) {
      if (!j.is_object()) throw Error(ErrorCode::kMalformedDocument, "image entry is not an object");
      ImageRecord r;
      r.id = require(j, "id", "image").get<ImageId>();
      const auto where = "image " + std::to_string(r.id);
      r.file_name = require(j, "file_name", where, r.id).get<std::string>();
      r.width = detail::optional_dimension(j, "width", r.id);
      r.height = detail::optional_dimension(j, "height", r.id);
      images.push_back(std::move(r));
    }

    std::vector<AnnotationRecord> annotations;
    annotations.reserve(annotations_json.size());
    for (const auto& j : annotations_json) {
      if (!j.is_object()) {
        throw Error(ErrorCode::kMalformedDocument, "annotation entry is not an object");
      }
      AnnotationRecord a;
      a.id = require(j, "id", "annotation").get<AnnotationId>();
      const auto where = "annotation " + std::to_string(a.id);
      a.image_id = require(j, "image_id", where, a.id).get<ImageId>();
      const auto task = parse_task_name(require(j, "task", where, a.id).get<std::string>());
      if (!task) throw Error(ErrorCode::kMalformedDocument, where + ": unknown task", a.id);
      a.task = *task;
      a.text = require(j, "text", where, a.id).get<std::string>();
      const auto& risk = require(j, "risk_exposed", where, a.id);
      if (!risk.is_boolean()) {
        throw Error(ErrorCode::kMalformedDocument, where + ": risk_exposed must be boolean", a.id);
      }
      a.risk_exposed = risk.get<bool>();
      if (auto it = j.find("reba_level"); it != j.end() && !it->is_null()) {
        auto level = it->is_string() ? parse_risk_level(it->get<std::string>()) : std::nullopt;
        if (!level) throw Error(ErrorCode::kMalformedDocument, where + ": unknown reba_level", a.id);
        a.reba_level = level;
      }
      annotations.push_back(std::move(a));
    }
    return Dataset::create(std::move(images), std::move(annotations), partition);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedDocument, e.what());
  }
}

inline Dataset parse_dataset(std::string_view text) {
  nlohmann::json doc = nlohmann::json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) throw Error(ErrorCode::kMalformedDocument, "not a JSON document");
  return dataset_from_json(doc);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

inline Dataset load_dataset(const std::filesystem::path& path) {
  return parse_dataset(read_file(path));
}

inline nlohmann::ordered_json dataset_to_json(const Dataset& d) {
  nlohmann::ordered_json doc;
  doc["partition"] = std::string(to_string(d.partition()));
  auto& images = doc["images"] = nlohmann::ordered_json::array();
  for (const auto& img : d.images()) {
    nlohmann::ordered_json j;
    j["id"] = img.id;
    j["file_name"] = img.file_name;
    if (img.width) j["width"] = *img.width;
    if (img.height) j["height"] = *img.height;
    images.push_back(std::move(j));
  }
  auto& annotations = doc["annotations"] = nlohmann::ordered_json::array();
  for (const auto& a : d.annotations()) {
    nlohmann::ordered_json j;
    j["id"] = a.id;
    j["image_id"] = a.image_id;
    j["task"] = std::string(task_name(a.task));
    j["text"] = a.text;
    j["risk_exposed"] = a.risk_exposed;
    if (a.reba_level) j["reba_level"] = std::string(to_string(*a.reba_level));
    annotations.push_back(std::move(j));
  }
  return doc;
}

/// Canonical text: id-sorted arrays, two-space indent, trailing newline.
inline std::string serialize_dataset(const Dataset& d) { return dataset_to_json(d).dump(2) + "\n"; }

inline void write_dataset(const Dataset& d, const std::filesystem::path& path) {
  write_file(path, serialize_dataset(d));
}

namespace detail {

inline std::pair<Dataset, Dataset> partition_by(const Dataset& d, const std::set<ImageId>& test) {
  std::vector<ImageRecord> fine_images, test_images;
  for (const auto& img : d.images()) {
    (test.contains(img.id) ? test_images : fine_images).push_back(img);
  }
  std::vector<AnnotationRecord> fine_ann, test_ann;
  for (const auto& a : d.annotations()) {
    (test.contains(a.image_id) ? test_ann : fine_ann).push_back(a);
  }
  return {Dataset::create(std::move(fine_images), std::move(fine_ann), Partition::kFineTune),
          Dataset::create(std::move(test_images), std::move(test_ann), Partition::kTest)};
}

inline void require_unsplit(const Dataset& d) {
  if (d.partition() != Partition::kUnsplit) {
    throw Error(ErrorCode::kInvalidPartition, "dataset is already partitioned as " +
                                                  std::string(to_string(d.partition())));
  }
}

}  // namespace detail

/// Seeded image-level split into (fine-tune, test). Every annotation follows
/// its image.
inline std::pair<Dataset, Dataset> split_dataset(const Dataset& d, std::int64_t test_count,
                                                 std::uint64_t seed) {
  detail::require_unsplit(d);
  const auto total = static_cast<std::int64_t>(d.images().size());
  if (test_count <= 0 || test_count >= total) {
    throw Error(ErrorCode::kInvalidCount, "test_count " + std::to_string(test_count) +
                                              " outside (0, " + std::to_string(total) + ")");
  }
  std::vector<ImageId> ids;
  ids.reserve(d.images().size());
  for (const auto& img : d.images()) ids.push_back(img.id);
  SeededRng rng(seed);
  rng.shuffle(std::span<ImageId>(ids));
  return detail::partition_by(d, std::set<ImageId>(ids.begin(), ids.begin() + test_count));
}

/// Split pinned to an explicit list of test image ids.
inline std::pair<Dataset, Dataset> split_dataset_by_ids(const Dataset& d,
                                                        const std::vector<ImageId>& test_ids) {
  detail::require_unsplit(d);
  std::set<ImageId> test(test_ids.begin(), test_ids.end());
  if (test.size() != test_ids.size() || test.empty() || test.size() >= d.images().size()) {
    throw Error(ErrorCode::kInvalidCount, "test id list must be non-empty, duplicate-free and "
                                          "smaller than the image count");
  }
  for (auto id : test) {
    if (d.find_image(id) == nullptr) {
      throw Error(ErrorCode::kDanglingReference,
                  "test id " + std::to_string(id) + " is not in the dataset", id);
    }
  }
  return detail::partition_by(d, test);
}

/// Reads whitespace- or comma-separated image ids.
inline std::vector<ImageId> load_id_list(const std::filesystem::path& path) {
  std::string text = read_file(path);
  std::replace(text.begin(), text.end(), ',', ' ');
  std::istringstream in(text);
  std::vector<ImageId> ids;
  std::string tok;
  while (in >> tok) {
    try {
      std::size_t used = 0;
      ids.push_back(std::stoll(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kMalformedDocument, "bad image id \"" + tok + "\" in " + path.string());
    }
  }
  return ids;
}

}  // namespace ergoeval
