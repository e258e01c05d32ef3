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

#include <cstdlib>
#include <thread>

#include "support.hpp"

namespace ergoeval {
namespace {

using testing::synthetic_dataset;
using testing::TempDir;
using testing::write_fake_images;
namespace fs = std::filesystem;

/// Local HTTP server on an ephemeral port, stopped on destruction.
class LocalServer {
 public:
  template <typename Handler>
  explicit LocalServer(Handler handler) {
    server_.Post("/v1/infer", [this, handler](const httplib::Request& req, httplib::Response& res) {
      ++requests_;
      handler(req, res);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalServer() {
    server_.stop();
    thread_.join();
  }

  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/infer"; }
  int requests() const { return requests_.load(); }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> requests_{0};
};

BackendConfig remote_config(const std::string& endpoint) {
  BackendConfig cfg;
  cfg.kind = BackendKind::kRemoteHttp;
  cfg.endpoint = endpoint;
  cfg.model_id = "ergochat";
  cfg.timeout_seconds = 5;
  cfg.max_retries = 2;
  cfg.backoff.initial = std::chrono::duration<double>(0.001);
  cfg.backoff.cap = std::chrono::duration<double>(0.004);
  return cfg;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no ergoeval::Error thrown";
  return ErrorCode::kIo;
}

TEST(Digest, KnownVectors) {
  EXPECT_EQ(sha256_hex(as_bytes("abc")),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(base64_encode(as_bytes("")), "");
  EXPECT_EQ(base64_encode(as_bytes("foobar")), "Zm9vYmFy");
  EXPECT_EQ(base64_encode(as_bytes("fo")), "Zm8=");
}

TEST(CacheKey, DependsOnEveryComponent) {
  const auto k = InferenceCacheKey::make("m", as_bytes("img"), "[caption] p");
  EXPECT_EQ(k, InferenceCacheKey::make("m", as_bytes("img"), "[caption] p"));
  EXPECT_NE(k.digest(), InferenceCacheKey::make("n", as_bytes("img"), "[caption] p").digest());
  EXPECT_NE(k.digest(), InferenceCacheKey::make("m", as_bytes("imh"), "[caption] p").digest());
  EXPECT_NE(k.digest(), InferenceCacheKey::make("m", as_bytes("img"), "[vqa] p").digest());
  EXPECT_EQ(k.digest().size(), 64u);
}

TEST(Backoff, JitteredExponentialWithCap) {
  BackoffPolicy p;
  SeededRng rng(1);
  for (int attempt = 0; attempt < 12; ++attempt) {
    const double nominal = std::min(30.0, 0.5 * std::pow(2.0, attempt));
    for (int i = 0; i < 50; ++i) {
      const double d = p.delay(attempt, rng).count();
      EXPECT_GE(d, nominal / 2);
      EXPECT_LE(d, nominal);
    }
  }
}

TEST(StubBackend, DeterministicPerKey) {
  StubBackend a("stub"), b("stub"), c("other");
  const auto img = as_bytes("JPEGDATA:1");
  const auto caption = a.infer(img, build_prompt(Task::kCaption));
  EXPECT_EQ(caption, b.infer(img, build_prompt(Task::kCaption)));
  EXPECT_FALSE(caption.empty());
  const auto vqa = a.infer(img, build_prompt(Task::kVqa));
  EXPECT_TRUE(vqa.starts_with("Yes") || vqa.starts_with("No")) << vqa;
  EXPECT_EQ(a.calls(), 2);
  std::set<std::string> distinct;
  for (int i = 0; i < 50; ++i) {
    distinct.insert(c.infer(as_bytes("JPEGDATA:" + std::to_string(i)), build_prompt(Task::kCaption)));
  }
  EXPECT_GT(distinct.size(), 10u);
}

TEST(Config, Validation) {
  BackendConfig cfg;
  cfg.kind = BackendKind::kRemoteHttp;
  EXPECT_EQ(code_of([&] { validate(cfg); }), ErrorCode::kInvariantViolation);
  cfg.endpoint = "http://127.0.0.1:1/x";
  EXPECT_NO_THROW(validate(cfg));
  cfg.timeout_seconds = 0;
  EXPECT_EQ(code_of([&] { validate(cfg); }), ErrorCode::kInvariantViolation);
  cfg.timeout_seconds = 1;
  cfg.max_in_flight = 0;
  EXPECT_EQ(code_of([&] { validate(cfg); }), ErrorCode::kInvariantViolation);
  cfg.max_in_flight = 1;
  cfg.max_retries = -1;
  EXPECT_EQ(code_of([&] { validate(cfg); }), ErrorCode::kInvariantViolation);
}

TEST(InferOne, RejectsEmptyImage) {
  EXPECT_EQ(code_of([] { infer_one(ByteSpan{}, "[caption] x", BackendConfig{}); }),
            ErrorCode::kInvariantViolation);
  EXPECT_FALSE(infer_one(as_bytes("x"), "[caption] x", BackendConfig{}).empty());
}

TEST(HttpBackend, SendsRequestAndParsesText) {
  ::setenv("ERGOEVAL_TEST_TOKEN", "secret", 1);
  std::string auth, body;
  LocalServer server([&](const httplib::Request& req, httplib::Response& res) {
    auth = req.get_header_value("Authorization");
    body = req.body;
    res.set_content(R"({"text": "The worker is bending."})", "application/json");
  });
  auto cfg = remote_config(server.endpoint());
  cfg.auth_token_env = "ERGOEVAL_TEST_TOKEN";
  EXPECT_EQ(infer_one(as_bytes("foobar"), "[caption] describe", cfg), "The worker is bending.");
  EXPECT_EQ(auth, "Bearer secret");
  const auto j = nlohmann::json::parse(body);
  EXPECT_EQ(j["model"], "ergochat");
  EXPECT_EQ(j["prompt"], "[caption] describe");
  EXPECT_EQ(j["image_base64"], "Zm9vYmFy");
  ::unsetenv("ERGOEVAL_TEST_TOKEN");
}

TEST(HttpBackend, RetriesServerErrorsThenFails) {
  LocalServer server([](const httplib::Request&, httplib::Response& res) {
    res.status = 500;
    res.set_content("backend exploded", "text/plain");
  });
  const auto cfg = remote_config(server.endpoint());
  try {
    infer_one(as_bytes("img"), "[caption] x", cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kRemoteError);
    EXPECT_NE(std::string(e.what()).find("status 500: backend exploded"), std::string::npos)
        << e.what();
  }
  EXPECT_EQ(server.requests(), cfg.max_retries + 1);
}

TEST(HttpBackend, RecoversAfterTransientFailure) {
  std::atomic<int> n{0};
  LocalServer server([&](const httplib::Request&, httplib::Response& res) {
    if (n++ < 2) {
      res.status = 429;
      return;
    }
    res.set_content(R"({"text": "ok"})", "application/json");
  });
  EXPECT_EQ(infer_one(as_bytes("img"), "[vqa] x", remote_config(server.endpoint())), "ok");
  EXPECT_EQ(server.requests(), 3);
}

TEST(HttpBackend, ClientErrorsAreNotRetried) {
  LocalServer server([](const httplib::Request&, httplib::Response& res) {
    res.status = 400;
    res.set_content(std::string(500, 'x'), "text/plain");
  });
  try {
    infer_one(as_bytes("img"), "[vqa] x", remote_config(server.endpoint()));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kRemoteError);
    EXPECT_LT(std::string(e.what()).size(), 260u);
  }
  EXPECT_EQ(server.requests(), 1);
}

TEST(HttpBackend, MalformedBodyIsRemoteError) {
  LocalServer server([](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"answer": 1})", "application/json");
  });
  EXPECT_EQ(code_of([&] { infer_one(as_bytes("img"), "[vqa] x", remote_config(server.endpoint())); }),
            ErrorCode::kRemoteError);
  EXPECT_EQ(server.requests(), 1);
}

TEST(HttpBackend, SlowServerTimesOut) {
  LocalServer server([](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(600));
    res.set_content(R"({"text": "late"})", "application/json");
  });
  auto cfg = remote_config(server.endpoint());
  cfg.timeout_seconds = 0.1;
  cfg.max_retries = 0;
  EXPECT_EQ(code_of([&] { infer_one(as_bytes("img"), "[vqa] x", cfg); }), ErrorCode::kTimeout);
}

TEST(HttpBackend, AuthMissingBeforeAnyRequest) {
  ::unsetenv("ERGOEVAL_TEST_ABSENT_TOKEN");
  LocalServer server([](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"text": "x"})", "application/json");
  });
  auto cfg = remote_config(server.endpoint());
  cfg.auth_token_env = "ERGOEVAL_TEST_ABSENT_TOKEN";
  EXPECT_EQ(code_of([&] { infer_one(as_bytes("img"), "[vqa] x", cfg); }), ErrorCode::kAuthMissing);
  const auto d = synthetic_dataset(5, 1);
  TempDir dir;
  write_fake_images(d, dir.path());
  EXPECT_EQ(code_of([&] { run_batch(d, Task::kCaption, cfg, dir / "cache", dir.path()); }),
            ErrorCode::kAuthMissing);
  EXPECT_EQ(server.requests(), 0);
}

TEST(RunBatch, CacheServesWarmRerun) {
  const auto d = synthetic_dataset(40, 2);
  TempDir dir;
  write_fake_images(d, dir / "images");
  StubBackend backend("stub");
  std::optional<ResponseCache> cache(std::in_place, dir / "cache");
  const auto cold = run_batch(d, Task::kCaption, backend, dir / "images", cache, 4);
  EXPECT_EQ(cold.backend_calls, 40);
  EXPECT_EQ(cold.cache_hits, 0);
  const auto warm = run_batch(d, Task::kCaption, backend, dir / "images", cache, 4);
  EXPECT_EQ(warm.backend_calls, 0);
  EXPECT_EQ(warm.cache_hits, 40);
  EXPECT_EQ(warm.records, cold.records);
  EXPECT_EQ(backend.calls(), 40);
  for (const auto& e : fs::directory_iterator(dir / "cache")) {
    EXPECT_EQ(e.path().filename().string().find(".tmp"), std::string::npos);
  }
}

TEST(RunBatch, CachedTextMatchesFreshInference) {
  // Property: any cache hit returns what the backend returns for that key.
  SeededRng gen(8);
  for (int trial = 0; trial < 10; ++trial) {
    const auto d = synthetic_dataset(5 + gen.below(20), gen.next());
    TempDir dir;
    write_fake_images(d, dir.path());
    StubBackend backend("m" + std::to_string(trial));
    std::optional<ResponseCache> cache(std::in_place, dir / "cache");
    const auto task = gen.coin() ? Task::kCaption : Task::kVqa;
    run_batch(d, task, backend, dir.path(), cache, 3);
    const auto warm = run_batch(d, task, backend, dir.path(), cache, 3);
    for (const auto& r : warm.records) {
      const auto* img = d.find_image(r.image_id);
      const auto bytes = read_file(dir / img->file_name);
      EXPECT_EQ(r.output_text, StubBackend("m" + std::to_string(trial)).infer(as_bytes(bytes), r.prompt));
      EXPECT_EQ(r.task, task);
      EXPECT_EQ(r.prompt, build_prompt(task));
    }
  }
}

TEST(RunBatch, UnreadableImagesGoToSidecar) {
  const auto d = synthetic_dataset(200, 3);
  TempDir dir;
  write_fake_images(d, dir / "images");
  fs::remove(dir / "images" / "img_7.jpg");
  fs::remove(dir / "images" / "img_50.jpg");
  write_file(dir / "images" / "img_120.jpg", "");
  BackendConfig cfg;
  const auto r = run_batch(d, Task::kCaption, cfg, fs::path(), dir / "images");
  EXPECT_EQ(r.records.size(), 197u);
  ASSERT_EQ(r.failures.size(), 3u);
  EXPECT_EQ(r.failures[0].image_id, 7);
  EXPECT_EQ(r.failures[1].image_id, 50);
  EXPECT_EQ(r.failures[2].image_id, 120);
  EXPECT_EQ(r.failures[2].file_name, "img_120.jpg");
  EXPECT_TRUE(std::is_sorted(r.records.begin(), r.records.end(),
                             [](const auto& a, const auto& b) { return a.image_id < b.image_id; }));

  write_batch(r, dir / "preds.jsonl");
  EXPECT_EQ(parse_predictions(read_file(dir / "preds.jsonl")).size(), 197u);
  const auto sidecar = read_file(dir / "preds.jsonl.failures.jsonl");
  EXPECT_EQ(std::count(sidecar.begin(), sidecar.end(), '\n'), 3);
  EXPECT_EQ(nlohmann::json::parse(sidecar.substr(0, sidecar.find('\n')))["image_id"], 7);
}

TEST(RunBatch, RespectsMaxInFlight) {
  const auto d = synthetic_dataset(24, 4);
  TempDir dir;
  write_fake_images(d, dir.path());
  for (int limit : {1, 3}) {
    StubBackend backend("stub", std::chrono::milliseconds(15));
    run_batch(d, Task::kVqa, backend, dir.path(), std::nullopt, limit);
    EXPECT_LE(backend.peak_in_flight(), limit);
    EXPECT_GE(backend.peak_in_flight(), 1);
    EXPECT_EQ(backend.calls(), 24);
  }
}

TEST(RunBatch, RemoteFailuresAreCollectedPerImage) {
  LocalServer server([](const httplib::Request& req, httplib::Response& res) {
    const auto j = nlohmann::json::parse(req.body);
    if (j["image_base64"].get<std::string>().size() % 2 == 0) {
      res.status = 503;
      return;
    }
    res.set_content(R"({"text": "Yes, the worker is at risk."})", "application/json");
  });
  const auto d = synthetic_dataset(12, 5);
  TempDir dir;
  write_fake_images(d, dir.path());
  auto cfg = remote_config(server.endpoint());
  cfg.max_retries = 0;
  const auto r = run_batch(d, Task::kVqa, cfg, fs::path(), dir.path());
  EXPECT_EQ(r.records.size() + r.failures.size(), 12u);
  for (const auto& f : r.failures) EXPECT_NE(f.error.find("status 503"), std::string::npos);
}

}  // namespace
}  // namespace ergoeval
