#include <gtest/gtest.h>

#include <deque>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "support.hpp"
#include "vulnforge/errors.hpp"
#include "vulnforge/net.hpp"
#include "vulnforge/text.hpp"

using namespace vulnforge;
using namespace std::chrono_literals;

namespace {

// Returns scripted responses in order; a status of -1 means a connection failure.
class ScriptedTransport : public Transport {
 public:
  explicit ScriptedTransport(std::deque<HttpResponse> script) : script_(std::move(script)) {}
  HttpResponse get(const HttpRequest& request) override {
    std::lock_guard lock(mutex_);
    urls.push_back(request.url);
    if (script_.empty()) throw NetworkUnavailable("script exhausted");
    auto r = script_.front();
    script_.pop_front();
    if (r.status == -1) throw NetworkUnavailable("connection refused");
    return r;
  }
  std::vector<std::string> urls;

 private:
  std::mutex mutex_;
  std::deque<HttpResponse> script_;
};

struct SleepLog {
  std::vector<std::chrono::milliseconds> sleeps;
  std::mutex mutex;
  Sleeper sleeper() {
    return [this](std::chrono::milliseconds d) {
      std::lock_guard lock(mutex);
      sleeps.push_back(d);
    };
  }
};

FetchCachePolicy policy_in(const vftest::TempDir& dir) {
  FetchCachePolicy p;
  p.cache_dir = dir.path();
  p.rate_limit = 1000.0;
  p.backoff_base = 100ms;
  p.max_retries = 3;
  return p;
}

}  // namespace

TEST(Net, UrlHost) {
  EXPECT_EQ(url_host("https://api.github.com/repos/x"), "api.github.com");
  EXPECT_EQ(url_host("http://h:8080?q=1"), "h:8080");
}

TEST(Net, PolicyValidation) {
  FetchCachePolicy p;
  EXPECT_NO_THROW(p.validate());
  p.rate_limit = 0;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = {};
  p.max_retries = -1;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = {};
  p.max_parallel = 0;
  EXPECT_THROW(p.validate(), InvalidArgument);
}

TEST(Net, CacheStoresBodyAndSidecar) {
  vftest::TempDir dir;
  FetchCache cache(dir.path());
  cache.store("cve/abc.json", "https://x/y", {200, "{}"});
  EXPECT_TRUE(std::filesystem::exists(dir / "cve/abc.json"));
  const auto meta = nlohmann::json::parse(read_file(dir / "cve/abc.meta"));
  EXPECT_EQ(meta.at("url"), "https://x/y");
  EXPECT_EQ(meta.at("status"), 200);
  const auto loaded = cache.load("cve/abc.json", 3600s);
  ASSERT_TRUE(loaded);
  EXPECT_EQ(loaded->body, "{}");
  EXPECT_FALSE(loaded->stale);
  EXPECT_FALSE(cache.load("cve/other.json", 3600s));
}

TEST(Net, FetcherServesWarmCacheWithoutNetwork) {
  vftest::TempDir dir;
  auto transport = std::make_shared<ScriptedTransport>(std::deque<HttpResponse>{{200, "body"}});
  Fetcher fetcher(policy_in(dir), transport, [](auto) {});
  EXPECT_EQ(fetcher.get("https://h/a", "k/a.json").body, "body");
  EXPECT_EQ(fetcher.get("https://h/a", "k/a.json").body, "body");
  EXPECT_EQ(fetcher.network_requests(), 1u);

  auto offline = std::make_shared<OfflineTransport>();
  Fetcher warm(policy_in(dir), offline, [](auto) {});
  EXPECT_EQ(warm.get("https://h/a", "k/a.json").body, "body");
  EXPECT_EQ(offline->attempts(), 0u);
  EXPECT_THROW(warm.get("https://h/b", "k/b.json"), NetworkUnavailable);
  EXPECT_GE(offline->attempts(), 1u);
}

TEST(Net, RetriesWithExponentialBackoff) {
  vftest::TempDir dir;
  auto transport = std::make_shared<ScriptedTransport>(
      std::deque<HttpResponse>{{503, ""}, {-1, ""}, {429, ""}, {200, "ok"}});
  SleepLog log;
  Fetcher fetcher(policy_in(dir), transport, log.sleeper());
  EXPECT_EQ(fetcher.get("https://h/a", "a.json").body, "ok");
  EXPECT_EQ(fetcher.network_requests(), 4u);
  std::vector<std::chrono::milliseconds> backoffs;
  for (auto d : log.sleeps) {
    if (d >= 100ms) backoffs.push_back(d);
  }
  EXPECT_EQ(backoffs, (std::vector<std::chrono::milliseconds>{100ms, 200ms, 400ms}));
}

TEST(Net, NotFoundIsReturnedNotRetried) {
  vftest::TempDir dir;
  auto transport = std::make_shared<ScriptedTransport>(std::deque<HttpResponse>{{404, "nope"}});
  Fetcher fetcher(policy_in(dir), transport, [](auto) {});
  EXPECT_EQ(fetcher.get("https://h/a", "a.json").status, 404);
  EXPECT_EQ(fetcher.network_requests(), 1u);
}

TEST(Net, GivesUpAfterMaxRetries) {
  vftest::TempDir dir;
  auto transport = std::make_shared<ScriptedTransport>(
      std::deque<HttpResponse>{{500, ""}, {500, ""}, {500, ""}, {500, ""}, {200, "late"}});
  Fetcher fetcher(policy_in(dir), transport, [](auto) {});
  EXPECT_THROW(fetcher.get("https://h/a", "a.json"), NetworkUnavailable);
  EXPECT_EQ(transport->urls.size(), 4u);
}

TEST(Net, StaleEntryIsRefreshedOrUsedAsFallback) {
  vftest::TempDir dir;
  FetchCache cache(dir.path());
  cache.store("a.json", "https://h/a", {200, "old"});
  auto meta = nlohmann::json::parse(read_file(dir / "a.meta"));
  meta["fetched_at"] = 1000;
  write_file_atomic(dir / "a.meta", meta.dump());

  auto policy = policy_in(dir);
  policy.max_retries = 0;
  auto failing = std::make_shared<OfflineTransport>();
  Fetcher fallback(policy, failing, [](auto) {});
  EXPECT_EQ(fallback.get("https://h/a", "a.json").body, "old");
  EXPECT_EQ(failing->attempts(), 1u);

  auto fresh = std::make_shared<ScriptedTransport>(std::deque<HttpResponse>{{200, "new"}});
  Fetcher refresh(policy, fresh, [](auto) {});
  EXPECT_EQ(refresh.get("https://h/a", "a.json").body, "new");
  EXPECT_EQ(read_file(dir / "a.json"), "new");
}

TEST(Net, RateLimiterSpacesRequestsPerHost) {
  SleepLog log;
  RateLimiter limiter(2.0, log.sleeper());
  limiter.acquire("a");
  limiter.acquire("b");
  EXPECT_TRUE(log.sleeps.empty());
  limiter.acquire("a");
  ASSERT_EQ(log.sleeps.size(), 1u);
  EXPECT_GT(log.sleeps[0], 400ms);
  EXPECT_LE(log.sleeps[0], 500ms);
}

TEST(Net, ReplayTransportServesIndex) {
  vftest::TempDir dir;
  write_file_atomic(dir / "body.txt", "from file");
  write_file_atomic(dir / "index.json",
                    R"([{"url":"https://h/a","status":200,"file":"body.txt"},)"
                    R"({"url":"https://h/b","status":404,"body":"inline"}])");
  ReplayTransport replay(dir.path());
  EXPECT_EQ(replay.get({"https://h/a", {}}).body, "from file");
  const auto b = replay.get({"https://h/b", {}});
  EXPECT_EQ(b.status, 404);
  EXPECT_EQ(b.body, "inline");
  EXPECT_THROW(replay.get({"https://h/c", {}}), NetworkUnavailable);
  EXPECT_EQ(replay.requests(), 3u);
}

TEST(Net, ConcurrentFetchesShareCache) {
  vftest::TempDir dir;
  std::deque<HttpResponse> script;
  for (int i = 0; i < 16; ++i) script.push_back({200, "x"});
  auto transport = std::make_shared<ScriptedTransport>(script);
  Fetcher fetcher(policy_in(dir), transport, [](auto) {});
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 2; ++i) {
        const auto key = "k" + std::to_string(t) + "_" + std::to_string(i) + ".json";
        EXPECT_EQ(fetcher.get("https://h/" + key, key).body, "x");
      }
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(fetcher.network_requests(), 16u);
}
