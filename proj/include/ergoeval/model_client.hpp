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

// Model inference behind one interface: a remote HTTP endpoint or a
// deterministic stub, with a content-addressed response cache and a bounded
// parallel batch runner.
//
// Wire format (remote):
//   POST <endpoint>   Authorization: Bearer <token>   (when configured)
//   {"model": ..., "prompt": ..., "image_base64": ...}  ->  {"text": ...}

#pragma once

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif

#include <openssl/evp.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "ergoeval/dataset.hpp"
#include "ergoeval/error.hpp"
#include "ergoeval/evaluation.hpp"
#include "ergoeval/parallel.hpp"
#include "ergoeval/random.hpp"
#include "httplib.h"
#include "json.hpp"

namespace ergoeval {

using ByteSpan = std::span<const std::uint8_t>;

inline ByteSpan as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

inline std::string sha256_hex(ByteSpan data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::kIo, "sha256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

inline std::string base64_encode(ByteSpan data) {
  std::string out(4 * ((data.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), data.data(),
                                static_cast<int>(data.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

enum class BackendKind { kRemoteHttp, kStub };

struct BackoffPolicy {
  std::chrono::duration<double> initial{0.5};
  double factor = 2.0;
  std::chrono::duration<double> cap{30.0};

  /// Delay before retry `attempt` (0-based), jittered into [d/2, d].
  std::chrono::duration<double> delay(int attempt, SeededRng& rng) const {
    const double base = std::min(cap.count(), initial.count() * std::pow(factor, attempt));
    return std::chrono::duration<double>(base * (0.5 + 0.5 * rng.unit()));
  }
};

struct BackendConfig {
  BackendKind kind = BackendKind::kStub;
  std::string endpoint;
  /// Name of the environment variable holding the bearer token; empty sends
  /// no Authorization header.
  std::string auth_token_env;
  double timeout_seconds = 60.0;
  int max_in_flight = 4;
  int max_retries = 3;
  std::string model_id = "stub";
  BackoffPolicy backoff;
};

inline void validate(const BackendConfig& cfg) {
  if (cfg.kind == BackendKind::kRemoteHttp && cfg.endpoint.empty()) {
    throw Error(ErrorCode::kInvariantViolation, "remote backend needs an endpoint");
  }
  if (!(cfg.timeout_seconds > 0.0)) {
    throw Error(ErrorCode::kInvariantViolation, "timeout must be positive");
  }
  if (cfg.max_in_flight < 1) {
    throw Error(ErrorCode::kInvariantViolation, "max_in_flight must be at least 1");
  }
  if (cfg.max_retries < 0) {
    throw Error(ErrorCode::kInvariantViolation, "max_retries must be non-negative");
  }
}

struct InferenceCacheKey {
  std::string model_id;
  std::string image_digest;   // sha256 of the image bytes
  std::string prompt_digest;  // sha256 of the prompt text

  static InferenceCacheKey make(std::string_view model_id, ByteSpan image, std::string_view prompt) {
    return {std::string(model_id), sha256_hex(image), sha256_hex(as_bytes(prompt))};
  }

  /// File-name-safe digest of the whole key.
  std::string digest() const {
    return sha256_hex(as_bytes(model_id + '\n' + image_digest + '\n' + prompt_digest));
  }

  friend bool operator==(const InferenceCacheKey&, const InferenceCacheKey&) = default;
};

class InferenceBackend {
 public:
  virtual ~InferenceBackend() = default;
  virtual std::string infer(ByteSpan image, std::string_view prompt) = 0;
  virtual const std::string& model_id() const = 0;
};

/// Offline backend whose answer is a pure function of (model, image, prompt).
/// Counts calls and records the peak number of concurrent calls.
class StubBackend : public InferenceBackend {
 public:
  explicit StubBackend(std::string model_id,
                       std::chrono::milliseconds latency = std::chrono::milliseconds(0))
      : model_id_(std::move(model_id)), latency_(latency) {}

  std::string infer(ByteSpan image, std::string_view prompt) override {
    const int now = ++in_flight_;
    int peak = peak_in_flight_.load();
    while (now > peak && !peak_in_flight_.compare_exchange_weak(peak, now)) {
    }
    ++calls_;
    if (latency_.count() > 0) std::this_thread::sleep_for(latency_);
    auto text = respond(InferenceCacheKey::make(model_id_, image, prompt), prompt);
    --in_flight_;
    return text;
  }

  const std::string& model_id() const override { return model_id_; }
  int calls() const { return calls_.load(); }
  int peak_in_flight() const { return peak_in_flight_.load(); }

  static std::string respond(const InferenceCacheKey& key, std::string_view prompt) {
    const std::string d = key.digest();
    auto pick = [&](std::size_t pos, std::size_t n) {
      return static_cast<std::size_t>(std::stoul(d.substr(pos, 4), nullptr, 16)) % n;
    };
    const bool risky = pick(0, 10) < 7;
    if (prompt.starts_with(task_token(Task::kVqa))) {
      static constexpr std::array<std::string_view, 3> kYes{
          "Yes.", "Yes, the worker is exposed to postural ergonomic risks.", "yes"};
      static constexpr std::array<std::string_view, 3> kNo{
          "No.", "No, the worker's posture looks neutral.", "no"};
      return std::string(risky ? kYes[pick(4, 3)] : kNo[pick(4, 3)]);
    }
    static constexpr std::array<std::string_view, 4> kSubjects{
        "The worker", "A construction worker", "The worker in the image", "One worker"};
    static constexpr std::array<std::string_view, 8> kActions{
        "is lifting a heavy panel", "is kneeling on the floor while fixing rebar",
        "is bending forward to pick up materials", "is working overhead with a drill",
        "is carrying bricks on his shoulder", "is standing upright and measuring a board",
        "is squatting to tie steel bars", "is twisting his trunk while shoveling soil"};
    static constexpr std::array<std::string_view, 5> kPostures{
        "with his back bent", "with his arms raised above the shoulders",
        "with a neutral posture", "with his neck flexed", "with both knees bent"};
    std::string text = std::string(kSubjects[pick(8, 4)]) + " " +
                       std::string(kActions[pick(12, 8)]) + " " +
                       std::string(kPostures[pick(16, 5)]) + ". ";
    text += risky ? "The worker is exposed to ergonomic risks due to the awkward posture."
                  : "The worker is not exposed to significant ergonomic risks.";
    return text;
  }

 private:
  std::string model_id_;
  std::chrono::milliseconds latency_;
  std::atomic<int> calls_{0};
  std::atomic<int> in_flight_{0};
  std::atomic<int> peak_in_flight_{0};
};

/// JSON-over-HTTP client with bounded retries and jittered exponential
/// backoff on transient failures (timeouts, connection errors, 408, 429, 5xx).
class HttpBackend : public InferenceBackend {
 public:
  explicit HttpBackend(BackendConfig cfg) : cfg_(std::move(cfg)) {
    validate(cfg_);
    const auto scheme_end = cfg_.endpoint.find("://");
    const auto path_start =
        cfg_.endpoint.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    base_ = cfg_.endpoint.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : cfg_.endpoint.substr(path_start);
    if (!cfg_.auth_token_env.empty()) {
      const char* token = std::getenv(cfg_.auth_token_env.c_str());
      if (token == nullptr || *token == '\0') {
        throw Error(ErrorCode::kAuthMissing,
                    "environment variable " + cfg_.auth_token_env + " is not set");
      }
      token_ = token;
    }
  }

  const std::string& model_id() const override { return cfg_.model_id; }

  std::string infer(ByteSpan image, std::string_view prompt) override {
    nlohmann::ordered_json body;
    body["model"] = cfg_.model_id;
    body["prompt"] = std::string(prompt);
    body["image_base64"] = base64_encode(image);
    const std::string payload = body.dump();

    const auto key = InferenceCacheKey::make(cfg_.model_id, image, prompt).digest();
    SeededRng jitter(std::stoull(key.substr(0, 16), nullptr, 16));
    for (int attempt = 0;; ++attempt) {
      auto outcome = post_once(payload);
      if (outcome.text) return *outcome.text;
      if (!outcome.transient || attempt >= cfg_.max_retries) throw *outcome.error;
      std::this_thread::sleep_for(cfg_.backoff.delay(attempt, jitter));
    }
  }

 private:
  struct Outcome {
    std::optional<std::string> text;
    std::optional<Error> error;
    bool transient = false;
  };

  Outcome post_once(const std::string& payload) {
    httplib::Client client(base_);
    const auto secs = static_cast<time_t>(cfg_.timeout_seconds);
    const auto usecs = static_cast<time_t>((cfg_.timeout_seconds - static_cast<double>(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    httplib::Headers headers;
    if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);

    auto res = client.Post(path_, headers, payload, "application/json");
    if (!res) {
      const auto err = res.error();
      if (err == httplib::Error::Read || err == httplib::Error::Write ||
          err == httplib::Error::ConnectionTimeout) {
        return {std::nullopt, Error(ErrorCode::kTimeout, "request to " + cfg_.endpoint + " timed out"),
                true};
      }
      return {std::nullopt,
              Error(ErrorCode::kRemoteError, "request to " + cfg_.endpoint + " failed: " +
                                                 httplib::to_string(err) + " (status 0)"),
              true};
    }
    if (res->status == 200) {
      auto j = nlohmann::json::parse(res->body, nullptr, false);
      if (!j.is_discarded() && j.is_object() && j.contains("text") && j["text"].is_string()) {
        return {j["text"].get<std::string>(), std::nullopt, false};
      }
      return {std::nullopt,
              Error(ErrorCode::kRemoteError, "status 200 with malformed body: " + excerpt(res->body)),
              false};
    }
    const bool transient = res->status == 408 || res->status == 429 || res->status >= 500;
    return {std::nullopt,
            Error(ErrorCode::kRemoteError,
                  "status " + std::to_string(res->status) + ": " + excerpt(res->body)),
            transient};
  }

  static std::string excerpt(const std::string& body) {
    return body.size() <= 200 ? body : body.substr(0, 200) + "...";
  }

  BackendConfig cfg_;
  std::string base_;
  std::string path_;
  std::string token_;
};

inline std::unique_ptr<InferenceBackend> make_backend(const BackendConfig& cfg) {
  validate(cfg);
  if (cfg.kind == BackendKind::kStub) return std::make_unique<StubBackend>(cfg.model_id);
  return std::make_unique<HttpBackend>(cfg);
}

/// One inference through a freshly configured backend.
inline std::string infer_one(ByteSpan image, std::string_view prompt, const BackendConfig& cfg) {
  if (image.empty()) throw Error(ErrorCode::kInvariantViolation, "image bytes are empty");
  return make_backend(cfg)->infer(image, prompt);
}

/// One file per key digest holding the response text. Writes go through a
/// temporary file and a rename, so readers never see partial entries.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  std::optional<std::string> get(const InferenceCacheKey& key) const {
    const auto path = dir_ / key.digest();
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) return std::nullopt;
    return read_file(path);
  }

  void put(const InferenceCacheKey& key, std::string_view text) const {
    static std::atomic<std::uint64_t> counter{0};
    const auto final_path = dir_ / key.digest();
    const auto tmp = dir_ / (key.digest() + ".tmp." + std::to_string(::getpid()) + "." +
                             std::to_string(counter++));
    write_file(tmp, text);
    std::filesystem::rename(tmp, final_path);
  }

 private:
  std::filesystem::path dir_;
};

struct BatchFailure {
  ImageId image_id = 0;
  std::string file_name;
  std::string error;

  friend bool operator==(const BatchFailure&, const BatchFailure&) = default;
};

struct BatchResult {
  std::vector<PredictionRecord> records;  // ascending image_id
  std::vector<BatchFailure> failures;     // ascending image_id
  int backend_calls = 0;
  int cache_hits = 0;
};

/// Queries `backend` once per image annotated for `task`, at most
/// `max_in_flight` at a time. Per-image failures are collected, not thrown.
inline BatchResult run_batch(const Dataset& d, Task task, InferenceBackend& backend,
                             const std::filesystem::path& image_root,
                             const std::optional<ResponseCache>& cache, int max_in_flight) {
  const auto images = d.images_with(task);
  const std::string prompt = build_prompt(task);
  struct Slot {
    std::optional<PredictionRecord> record;
    std::optional<BatchFailure> failure;
  };
  std::vector<Slot> slots(images.size());
  std::atomic<int> calls{0}, hits{0};

  parallel_for(images.size(), static_cast<std::size_t>(std::max(1, max_in_flight)),
               [&](std::size_t i) {
    const auto* img = d.find_image(images[i]);
    try {
      const std::string bytes = read_file(image_root / img->file_name);
      if (bytes.empty()) throw Error(ErrorCode::kIo, "image file is empty");
      const auto key = InferenceCacheKey::make(backend.model_id(), as_bytes(bytes), prompt);
      std::optional<std::string> text = cache ? cache->get(key) : std::nullopt;
      if (text) {
        ++hits;
      } else {
        ++calls;
        text = backend.infer(as_bytes(bytes), prompt);
        if (cache) cache->put(key, *text);
      }
      slots[i].record = PredictionRecord{backend.model_id(), img->id, task, prompt, *text};
    } catch (const std::exception& e) {
      slots[i].failure = BatchFailure{img->id, img->file_name, e.what()};
    }
  });

  BatchResult out;
  for (auto& s : slots) {
    if (s.record) out.records.push_back(std::move(*s.record));
    if (s.failure) out.failures.push_back(std::move(*s.failure));
  }
  out.backend_calls = calls;
  out.cache_hits = hits;
  return out;
}

/// Batch run through a backend built from `cfg`; `cache_dir` may be empty
/// to disable caching.
inline BatchResult run_batch(const Dataset& d, Task task, const BackendConfig& cfg,
                             const std::filesystem::path& cache_dir,
                             const std::filesystem::path& image_root) {
  auto backend = make_backend(cfg);
  std::optional<ResponseCache> cache;
  if (!cache_dir.empty()) cache.emplace(cache_dir);
  return run_batch(d, task, *backend, image_root, cache, cfg.max_in_flight);
}

inline std::string serialize_failures(const std::vector<BatchFailure>& failures) {
  std::string out;
  for (const auto& f : failures) {
    nlohmann::ordered_json j;
    j["image_id"] = f.image_id;
    j["file_name"] = f.file_name;
    j["error"] = f.error;
    out += j.dump() + "\n";
  }
  return out;
}

/// Writes the prediction file and, next to it, `<out>.failures.jsonl`.
inline void write_batch(const BatchResult& r, const std::filesystem::path& out) {
  write_file(out, serialize_predictions(r.records));
  write_file(std::filesystem::path(out.string() + ".failures.jsonl"), serialize_failures(r.failures));
}

}  // namespace ergoeval
