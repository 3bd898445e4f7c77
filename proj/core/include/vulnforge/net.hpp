#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace vulnforge {

struct HttpRequest {
  std::string url;
  std::vector<std::pair<std::string, std::string>> headers;
};

struct HttpResponse {
  long status = 0;
  std::string body;
};

// A transport performs exactly one request. Connection-level failures throw
// NetworkUnavailable; HTTP error statuses are returned, not thrown.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse get(const HttpRequest& request) = 0;
};

class CurlTransport final : public Transport {
 public:
  explicit CurlTransport(std::chrono::seconds timeout = std::chrono::seconds(60));
  HttpResponse get(const HttpRequest& request) override;

 private:
  std::chrono::seconds timeout_;
};

// Serves recorded responses from a fixture directory containing index.json:
//   [{"url": "...", "status": 200, "file": "relative/body.json"}, ...]
// ("body" may be given inline instead of "file"). Requests for URLs that were
// never recorded throw NetworkUnavailable.
class ReplayTransport final : public Transport {
 public:
  explicit ReplayTransport(const std::filesystem::path& fixture_dir);
  HttpResponse get(const HttpRequest& request) override;

  std::size_t requests() const noexcept { return requests_.load(); }

 private:
  std::map<std::string, HttpResponse> responses_;
  std::atomic<std::size_t> requests_{0};
};

// Refuses every request. Used for --offline runs and to prove that a warm
// cache answers everything.
class OfflineTransport final : public Transport {
 public:
  HttpResponse get(const HttpRequest& request) override;
  std::size_t attempts() const noexcept { return attempts_.load(); }

 private:
  std::atomic<std::size_t> attempts_{0};
};

struct FetchCachePolicy {
  std::filesystem::path cache_dir = ".vulnforge-cache";
  std::chrono::seconds max_age = std::chrono::hours(24 * 30);
  double rate_limit = 1.0;  // requests per second per host
  int max_retries = 3;
  std::chrono::milliseconds backoff_base{500};
  unsigned max_parallel = 4;

  void validate() const;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

// Token bucket per host with a burst of one token.
class RateLimiter {
 public:
  RateLimiter(double rate_per_second, Sleeper sleeper);
  void acquire(const std::string& host);

 private:
  using Clock = std::chrono::steady_clock;
  double rate_;
  Sleeper sleeper_;
  std::mutex mutex_;
  std::map<std::string, Clock::time_point> next_slot_;
};

struct CachedResponse {
  long status = 0;
  std::string body;
  std::int64_t fetched_at = 0;  // unix seconds
  bool stale = false;
};

// On-disk response cache. Each body file has a sidecar with the same stem
// and a .meta extension holding {url, status, fetched_at}.
class FetchCache {
 public:
  explicit FetchCache(std::filesystem::path root) : root_(std::move(root)) {}

  const std::filesystem::path& root() const noexcept { return root_; }

  std::optional<CachedResponse> load(const std::filesystem::path& relative,
                                     std::chrono::seconds max_age) const;
  void store(const std::filesystem::path& relative, const std::string& url,
             const HttpResponse& response) const;

  static std::filesystem::path meta_path(const std::filesystem::path& body_path);

 private:
  std::filesystem::path root_;
};

std::string url_host(const std::string& url);

// Cache-first GET with per-host rate limiting and exponential backoff.
// Retries on transport failure, 429, 403 and 5xx. If every attempt fails and
// a stale cache entry exists, the stale entry is returned.
class Fetcher {
 public:
  Fetcher(FetchCachePolicy policy, std::shared_ptr<Transport> transport,
          Sleeper sleeper = nullptr);

  HttpResponse get(const std::string& url, const std::filesystem::path& cache_key,
                   const std::vector<std::pair<std::string, std::string>>& headers = {});

  // Overwrites a cache entry, e.g. to keep a payload that failed validation.
  void remember(const std::string& url, const std::filesystem::path& cache_key,
                const HttpResponse& response) const;

  const FetchCachePolicy& policy() const noexcept { return policy_; }
  const FetchCache& cache() const noexcept { return cache_; }
  std::size_t network_requests() const noexcept { return network_requests_.load(); }

 private:
  FetchCachePolicy policy_;
  std::shared_ptr<Transport> transport_;
  Sleeper sleeper_;
  FetchCache cache_;
  RateLimiter limiter_;
  std::atomic<std::size_t> network_requests_{0};
};

}  // namespace vulnforge
