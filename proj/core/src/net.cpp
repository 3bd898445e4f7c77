#include "vulnforge/net.hpp"

#include <curl/curl.h>

#include <nlohmann/json.hpp>
#include <thread>

#include "vulnforge/errors.hpp"
#include "vulnforge/text.hpp"

namespace vulnforge {

namespace {

std::size_t write_body(char* data, std::size_t size, std::size_t count, void* user) {
  static_cast<std::string*>(user)->append(data, size * count);
  return size * count;
}

void ensure_curl_initialized() {
  static std::once_flag once;
  std::call_once(once, [] { curl_global_init(CURL_GLOBAL_DEFAULT); });
}

bool retryable(long status) { return status == 403 || status == 429 || status >= 500; }

std::int64_t unix_now() {
  return std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace

CurlTransport::CurlTransport(std::chrono::seconds timeout) : timeout_(timeout) {
  ensure_curl_initialized();
}

HttpResponse CurlTransport::get(const HttpRequest& request) {
  std::unique_ptr<CURL, decltype(&curl_easy_cleanup)> curl(curl_easy_init(), &curl_easy_cleanup);
  if (!curl) throw NetworkUnavailable("curl_easy_init failed");
  curl_slist* raw_headers = nullptr;
  for (const auto& [name, value] : request.headers) {
    raw_headers = curl_slist_append(raw_headers, (name + ": " + value).c_str());
  }
  std::unique_ptr<curl_slist, decltype(&curl_slist_free_all)> headers(raw_headers,
                                                                       &curl_slist_free_all);
  HttpResponse response;
  curl_easy_setopt(curl.get(), CURLOPT_URL, request.url.c_str());
  curl_easy_setopt(curl.get(), CURLOPT_FOLLOWLOCATION, 1L);
  curl_easy_setopt(curl.get(), CURLOPT_USERAGENT, "vulnforge/0.1");
  curl_easy_setopt(curl.get(), CURLOPT_TIMEOUT, static_cast<long>(timeout_.count()));
  curl_easy_setopt(curl.get(), CURLOPT_NOSIGNAL, 1L);
  curl_easy_setopt(curl.get(), CURLOPT_HTTPHEADER, headers.get());
  curl_easy_setopt(curl.get(), CURLOPT_WRITEFUNCTION, &write_body);
  curl_easy_setopt(curl.get(), CURLOPT_WRITEDATA, &response.body);
  const CURLcode rc = curl_easy_perform(curl.get());
  if (rc != CURLE_OK) {
    throw NetworkUnavailable(request.url + ": " + curl_easy_strerror(rc));
  }
  curl_easy_getinfo(curl.get(), CURLINFO_RESPONSE_CODE, &response.status);
  return response;
}

ReplayTransport::ReplayTransport(const std::filesystem::path& fixture_dir) {
  const auto index_path = fixture_dir / "index.json";
  nlohmann::json index;
  try {
    index = nlohmann::json::parse(read_file(index_path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("bad replay index " + index_path.string() + ": " + e.what());
  }
  for (const auto& entry : index) {
    HttpResponse response;
    response.status = entry.value("status", 200L);
    if (entry.contains("file")) {
      response.body = read_file(fixture_dir / entry.at("file").get<std::string>());
    } else {
      response.body = entry.value("body", std::string());
    }
    responses_[entry.at("url").get<std::string>()] = std::move(response);
  }
}

HttpResponse ReplayTransport::get(const HttpRequest& request) {
  ++requests_;
  const auto it = responses_.find(request.url);
  if (it == responses_.end()) {
    throw NetworkUnavailable("no recorded response for " + request.url);
  }
  return it->second;
}

HttpResponse OfflineTransport::get(const HttpRequest& request) {
  ++attempts_;
  throw NetworkUnavailable("offline mode: refusing request to " + request.url);
}

void FetchCachePolicy::validate() const {
  if (!(rate_limit > 0.0)) throw InvalidArgument("rate_limit must be > 0");
  if (max_retries < 0) throw InvalidArgument("max_retries must be >= 0");
  if (max_parallel == 0) throw InvalidArgument("max_parallel must be >= 1");
}

RateLimiter::RateLimiter(double rate_per_second, Sleeper sleeper)
    : rate_(rate_per_second), sleeper_(std::move(sleeper)) {}

void RateLimiter::acquire(const std::string& host) {
  const auto interval = std::chrono::duration_cast<Clock::duration>(
      std::chrono::duration<double>(1.0 / rate_));
  Clock::time_point slot;
  {
    std::lock_guard lock(mutex_);
    const auto now = Clock::now();
    auto& next = next_slot_[host];
    slot = std::max(next, now);
    next = slot + interval;
  }
  const auto wait = slot - Clock::now();
  if (wait > Clock::duration::zero()) {
    sleeper_(std::chrono::duration_cast<std::chrono::milliseconds>(wait));
  }
}

std::filesystem::path FetchCache::meta_path(const std::filesystem::path& body_path) {
  auto meta = body_path;
  meta.replace_extension(".meta");
  return meta;
}

std::optional<CachedResponse> FetchCache::load(const std::filesystem::path& relative,
                                               std::chrono::seconds max_age) const {
  const auto body_path = root_ / relative;
  const auto meta = meta_path(body_path);
  std::error_code ec;
  if (!std::filesystem::exists(body_path, ec) || !std::filesystem::exists(meta, ec)) {
    return std::nullopt;
  }
  CachedResponse cached;
  try {
    const auto meta_json = nlohmann::json::parse(read_file(meta));
    cached.status = meta_json.at("status").get<long>();
    cached.fetched_at = meta_json.at("fetched_at").get<std::int64_t>();
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
  cached.body = read_file(body_path);
  cached.stale = max_age.count() > 0 && unix_now() - cached.fetched_at > max_age.count();
  return cached;
}

void FetchCache::store(const std::filesystem::path& relative, const std::string& url,
                       const HttpResponse& response) const {
  const auto body_path = root_ / relative;
  write_file_atomic(body_path, response.body);
  const nlohmann::json meta = {
      {"url", url}, {"status", response.status}, {"fetched_at", unix_now()}};
  write_file_atomic(meta_path(body_path), meta.dump(2) + "\n");
}

std::string url_host(const std::string& url) {
  auto start = url.find("://");
  start = start == std::string::npos ? 0 : start + 3;
  const auto end = url.find_first_of("/?#", start);
  return url.substr(start, end == std::string::npos ? std::string::npos : end - start);
}

Fetcher::Fetcher(FetchCachePolicy policy, std::shared_ptr<Transport> transport, Sleeper sleeper)
    : policy_(std::move(policy)),
      transport_(std::move(transport)),
      sleeper_(sleeper ? std::move(sleeper)
                       : Sleeper([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })),
      cache_(policy_.cache_dir),
      limiter_(policy_.rate_limit, sleeper_) {
  policy_.validate();
}

HttpResponse Fetcher::get(const std::string& url, const std::filesystem::path& cache_key,
                          const std::vector<std::pair<std::string, std::string>>& headers) {
  auto cached = cache_.load(cache_key, policy_.max_age);
  if (cached && !cached->stale) return {cached->status, std::move(cached->body)};

  std::string last_failure;
  for (int attempt = 0; attempt <= policy_.max_retries; ++attempt) {
    if (attempt > 0) sleeper_(policy_.backoff_base * (1 << (attempt - 1)));
    limiter_.acquire(url_host(url));
    ++network_requests_;
    try {
      HttpResponse response = transport_->get(HttpRequest{url, headers});
      if (retryable(response.status)) {
        last_failure = "HTTP " + std::to_string(response.status);
        continue;
      }
      cache_.store(cache_key, url, response);
      return response;
    } catch (const NetworkUnavailable& e) {
      last_failure = e.what();
    }
  }
  if (cached) return {cached->status, std::move(cached->body)};
  throw NetworkUnavailable(url + " failed after " + std::to_string(policy_.max_retries + 1) +
                           " attempt(s): " + last_failure);
}

void Fetcher::remember(const std::string& url, const std::filesystem::path& cache_key,
                       const HttpResponse& response) const {
  cache_.store(cache_key, url, response);
}

}  // namespace vulnforge
