#include "vulnforge/commit_miner.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <nlohmann/json.hpp>
#include <regex>
#include <set>
#include <thread>
#include <tuple>

#include "vulnforge/diff.hpp"
#include "vulnforge/errors.hpp"
#include "vulnforge/hashing.hpp"
#include "vulnforge/text.hpp"

namespace vulnforge {

namespace {

std::vector<std::pair<std::string, std::string>> api_headers(const MinerOptions& options) {
  std::vector<std::pair<std::string, std::string>> headers = {
      {"Accept", "application/vnd.github+json"}};
  if (options.api_token && !options.api_token->empty()) {
    headers.emplace_back("Authorization", "Bearer " + *options.api_token);
  }
  return headers;
}

std::filesystem::path commit_dir(const CommitRef& ref) {
  return std::filesystem::path("git") / ref.owner / ref.repo / ref.sha;
}

// Percent-encodes path segments while keeping '/' separators.
std::string encode_path(const std::string& path) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : path) {
    if (std::isalnum(c) || c == '/' || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xf]);
    }
  }
  return out;
}

// Full file content at a commit; nullopt when the blob does not exist.
std::optional<std::string> fetch_blob(const CommitRef& at, const std::string& path,
                                      Fetcher& fetcher, const MinerOptions& options) {
  const auto url = options.raw_base + "/" + at.owner + "/" + at.repo + "/" + at.sha + "/" +
                   encode_path(path);
  const auto key = commit_dir(at) / "blobs" / (sha256_hex(path) + ".src");
  auto headers = api_headers(options);
  headers.erase(headers.begin());  // raw host ignores Accept
  const auto response = fetcher.get(url, key, headers);
  if (response.status == 404) return std::nullopt;
  if (response.status != 200) {
    throw NetworkUnavailable(url + " returned HTTP " + std::to_string(response.status));
  }
  return response.body;
}

}  // namespace

bool is_full_sha(const std::string& sha) {
  static const std::regex pattern("[0-9a-f]{40}");
  return std::regex_match(sha, pattern);
}

void to_json(nlohmann::json& j, const CommitRef& ref) {
  j = {{"host", ref.host}, {"owner", ref.owner}, {"repo", ref.repo}, {"sha", ref.sha}};
}

void from_json(const nlohmann::json& j, CommitRef& ref) {
  ref.host = j.value("host", "github.com");
  ref.owner = j.at("owner").get<std::string>();
  ref.repo = j.at("repo").get<std::string>();
  ref.sha = j.at("sha").get<std::string>();
}

void to_json(nlohmann::json& j, const FileDelta& delta) {
  j = {{"path", delta.path},
       {"before_source", nullptr},
       {"after_source", nullptr},
       {"unified_diff", delta.unified_diff}};
  if (delta.before_source) j["before_source"] = *delta.before_source;
  if (delta.after_source) j["after_source"] = *delta.after_source;
}

void from_json(const nlohmann::json& j, FileDelta& delta) {
  delta.path = j.at("path").get<std::string>();
  const auto optional_text = [&](const char* key) -> std::optional<std::string> {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<std::string>();
  };
  delta.before_source = optional_text("before_source");
  delta.after_source = optional_text("after_source");
  delta.unified_diff = j.value("unified_diff", "");
}

void to_json(nlohmann::json& j, const FixCommit& fix) {
  j = {{"commit", fix.commit}, {"parent", fix.parent}, {"message", fix.message},
       {"deltas", fix.deltas}};
}

void from_json(const nlohmann::json& j, FixCommit& fix) {
  fix.commit = j.at("commit").get<CommitRef>();
  fix.parent = j.at("parent").get<CommitRef>();
  fix.message = j.value("message", "");
  fix.deltas = j.value("deltas", std::vector<FileDelta>{});
}

void to_json(nlohmann::json& j, const MinedFix& mined) {
  j = {{"cve_id", mined.cve_id}, {"fix", mined.fix}};
}

void from_json(const nlohmann::json& j, MinedFix& mined) {
  mined.cve_id = j.at("cve_id").get<std::string>();
  mined.fix = j.at("fix").get<FixCommit>();
}

void validate(const FileDelta& delta) {
  if (!delta.before_source && !delta.after_source) {
    throw PatchMismatch(delta.path + ": delta has neither before nor after source");
  }
  const std::string before = delta.before_source.value_or("");
  const std::string after = delta.after_source.value_or("");
  const auto hunks = parse_unified(delta.unified_diff);
  if (!hunks_fit(hunks, count_lines(before), count_lines(after))) {
    throw PatchMismatch(delta.path + ": hunk range exceeds source length");
  }
  if (apply_hunks(before, hunks) != after) {
    throw PatchMismatch(delta.path + ": diff does not reproduce the after source");
  }
}

std::vector<CommitRef> extract_fix_links(const CveRecord& record, LinkDiagnostics* diagnostics) {
  // github.com/<owner>/<repo>/commit(s)/<sha>[.patch|.diff], PR commit links
  // and API commit URLs. Query strings and fragments are ignored.
  static const std::regex commit_url(
      R"(^https?://(?:www\.)?github\.com/([^/\s]+)/([^/\s]+)/(?:commits?|pull/\d+/commits)/([0-9a-fA-F]{7,40})(?:\.patch|\.diff)?/?(?:[?#].*)?$)");
  static const std::regex api_url(
      R"(^https?://api\.github\.com/repos/([^/\s]+)/([^/\s]+)/commits/([0-9a-fA-F]{7,40})/?(?:[?#].*)?$)");
  static const std::regex pull_url(
      R"(^https?://(?:www\.)?github\.com/([^/\s]+)/([^/\s]+)/pull/(\d+)(?:/files)?/?(?:[?#].*)?$)");
  static const std::regex other_commit(
      R"(^https?://[^/\s]+/.*(?:/-/commit/|/commit/\?id=|/commit/|[?;&]h=|[?;&]id=)[0-9a-fA-F]{7,40})");

  LinkDiagnostics local;
  auto& diag = diagnostics ? *diagnostics : local;
  std::vector<CommitRef> refs;
  std::set<std::tuple<std::string, std::string, std::string>> seen;
  for (const auto& url : record.reference_urls) {
    std::smatch m;
    if (std::regex_match(url, m, commit_url) || std::regex_match(url, m, api_url)) {
      CommitRef ref{"github.com", m[1].str(), m[2].str(), to_lower(m[3].str())};
      if (ref.repo.ends_with(".git")) ref.repo.resize(ref.repo.size() - 4);
      if (!is_full_sha(ref.sha)) {
        ++diag.abbreviated_shas;
        continue;
      }
      if (seen.emplace(to_lower(ref.owner), to_lower(ref.repo), ref.sha).second) {
        refs.push_back(std::move(ref));
      }
    } else if (std::regex_match(url, m, pull_url)) {
      PullRef pull{m[1].str(), m[2].str(), std::stoi(m[3].str())};
      if (std::find(diag.pull_requests.begin(), diag.pull_requests.end(), pull) ==
          diag.pull_requests.end()) {
        diag.pull_requests.push_back(std::move(pull));
      }
    } else if (std::regex_search(url, m, other_commit)) {
      ++diag.unrecognized_hosts;
    } else {
      ++diag.non_commit_links;
    }
  }
  return refs;
}

bool is_cpp_path(const std::string& path) {
  const auto ext = to_lower(std::filesystem::path(path).extension().string());
  return ext == ".c" || ext == ".cc" || ext == ".cpp" || ext == ".cxx" || ext == ".h" ||
         ext == ".hpp" || ext == ".hxx";
}

void MinerDiagnostics::merge(const MinerDiagnostics& other) {
  non_cpp_files += other.non_cpp_files;
  binary_files += other.binary_files;
  oversized_files += other.oversized_files;
  missing_blobs += other.missing_blobs;
  orphan_commits += other.orphan_commits;
  missing_commits += other.missing_commits;
  malformed_responses += other.malformed_responses;
  messages.insert(messages.end(), other.messages.begin(), other.messages.end());
}

CommitRef resolve_pull_request(const PullRef& pull, Fetcher& fetcher, const MinerOptions& options,
                               MinerDiagnostics* diagnostics) {
  const auto url = options.api_base + "/repos/" + pull.owner + "/" + pull.repo + "/pulls/" +
                   std::to_string(pull.number);
  const auto key = std::filesystem::path("git") / pull.owner / pull.repo / "pulls" /
                   (std::to_string(pull.number) + ".json");
  const auto response = fetcher.get(url, key, api_headers(options));
  if (response.status == 404) throw CommitNotFound(url + ": pull request not found");
  if (response.status != 200) {
    throw NetworkUnavailable(url + " returned HTTP " + std::to_string(response.status));
  }
  try {
    const auto doc = nlohmann::json::parse(response.body);
    CommitRef head{"github.com", pull.owner, pull.repo,
                   to_lower(doc.at("head").at("sha").get<std::string>())};
    if (!is_full_sha(head.sha)) throw MalformedResponse(url + ": head sha is not 40 hex");
    const auto merge = doc.value("merge_commit_sha", nlohmann::json());
    if (diagnostics && doc.value("merged", false) && merge.is_string() &&
        merge.get<std::string>() != head.sha) {
      diagnostics->messages.push_back(pull.owner + "/" + pull.repo + "#" +
                                      std::to_string(pull.number) + ": merged as " +
                                      merge.get<std::string>() + ", using head " + head.sha);
    }
    return head;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedResponse(url + ": " + e.what() + " (payload kept at " +
                            (fetcher.cache().root() / key).string() + ")");
  }
}

FixCommit fetch_commit_pair(const CommitRef& ref, Fetcher& fetcher, const MinerOptions& options,
                            MinerDiagnostics* diagnostics) {
  if (!is_full_sha(ref.sha) || ref.owner.empty() || ref.repo.empty()) {
    throw InvalidArgument("invalid commit reference " + ref.project() + "@" + ref.sha);
  }
  if (ref.host != "github.com") {
    throw InvalidArgument("unsupported host " + ref.host);
  }
  MinerDiagnostics local;
  auto& diag = diagnostics ? *diagnostics : local;

  const auto url = options.api_base + "/repos/" + ref.owner + "/" + ref.repo + "/commits/" + ref.sha;
  const auto key = commit_dir(ref) / "commit.json";
  const auto response = fetcher.get(url, key, api_headers(options));
  if (response.status == 404 || response.status == 422) {
    throw CommitNotFound(ref.project() + "@" + ref.sha + " not found");
  }
  if (response.status != 200) {
    throw NetworkUnavailable(url + " returned HTTP " + std::to_string(response.status));
  }

  FixCommit fix;
  fix.commit = ref;
  struct ChangedFile {
    std::string path;
    std::string previous_path;
    std::string status;
  };
  std::vector<ChangedFile> files;
  try {
    const auto doc = nlohmann::json::parse(response.body);
    const auto& parents = doc.at("parents");
    if (!parents.is_array()) throw MalformedResponse(url + ": parents is not an array");
    if (parents.empty()) {
      throw OrphanCommit(ref.project() + "@" + ref.sha + " has no parent");
    }
    fix.parent = CommitRef{ref.host, ref.owner, ref.repo,
                           to_lower(parents.at(0).at("sha").get<std::string>())};
    if (!is_full_sha(fix.parent.sha) || fix.parent.sha == ref.sha) {
      throw MalformedResponse(url + ": bad parent sha");
    }
    fix.message = doc.at("commit").value("message", "");
    for (const auto& f : doc.value("files", nlohmann::json::array())) {
      ChangedFile cf;
      cf.path = f.at("filename").get<std::string>();
      cf.status = f.value("status", "modified");
      cf.previous_path = f.value("previous_filename", cf.path);
      files.push_back(std::move(cf));
    }
  } catch (const nlohmann::json::exception& e) {
    throw MalformedResponse(url + ": " + e.what() + " (payload kept at " +
                            (fetcher.cache().root() / key).string() + ")");
  }

  for (const auto& file : files) {
    if (!is_cpp_path(file.path)) {
      ++diag.non_cpp_files;
      continue;
    }
    FileDelta delta;
    delta.path = file.path;
    if (file.status != "added") {
      delta.before_source = fetch_blob(fix.parent, file.previous_path, fetcher, options);
    }
    if (file.status != "removed") {
      delta.after_source = fetch_blob(ref, file.path, fetcher, options);
    }
    if ((file.status != "added" && !delta.before_source) ||
        (file.status != "removed" && !delta.after_source)) {
      ++diag.missing_blobs;
      diag.messages.push_back(ref.project() + "@" + ref.sha + ": missing blob for " + file.path);
      continue;
    }
    const auto too_big = [](const std::optional<std::string>& s) {
      return s && s->size() > kMaxSourceBytes;
    };
    const auto binary = [](const std::optional<std::string>& s) {
      return s && s->find('\0') != std::string::npos;
    };
    if (too_big(delta.before_source) || too_big(delta.after_source)) {
      ++diag.oversized_files;
      continue;
    }
    if (binary(delta.before_source) || binary(delta.after_source)) {
      ++diag.binary_files;
      continue;
    }
    const auto hunks = diff_texts(delta.before_source.value_or(""), delta.after_source.value_or(""));
    delta.unified_diff = format_unified(hunks, "a/" + file.previous_path, "b/" + file.path);
    fetcher.remember("derived:" + ref.project() + "@" + ref.sha + ":" + file.path,
                     commit_dir(ref) / "diff" / (sha256_hex(file.path) + ".diff"),
                     HttpResponse{200, delta.unified_diff});
    validate(delta);
    fix.deltas.push_back(std::move(delta));
  }
  return fix;
}

std::vector<MinedFix> mine_fix_commits(const std::vector<CveRecord>& cves, Fetcher& fetcher,
                                       const MinerOptions& options, MinerDiagnostics* diagnostics,
                                       LinkDiagnostics* link_diagnostics) {
  MinerDiagnostics local;
  auto& diag = diagnostics ? *diagnostics : local;
  LinkDiagnostics local_links;
  auto& links = link_diagnostics ? *link_diagnostics : local_links;

  struct Job {
    std::string cve_id;
    std::optional<CommitRef> ref;
    std::optional<PullRef> pull;
  };
  std::vector<Job> jobs;
  for (const auto& cve : cves) {
    LinkDiagnostics per_cve;
    for (auto& ref : extract_fix_links(cve, &per_cve)) jobs.push_back({cve.cve_id, std::move(ref), {}});
    for (auto& pull : per_cve.pull_requests) jobs.push_back({cve.cve_id, {}, pull});
    links.non_commit_links += per_cve.non_commit_links;
    links.unrecognized_hosts += per_cve.unrecognized_hosts;
    links.abbreviated_shas += per_cve.abbreviated_shas;
    links.pull_requests.insert(links.pull_requests.end(), per_cve.pull_requests.begin(),
                               per_cve.pull_requests.end());
  }

  struct Outcome {
    std::optional<FixCommit> fix;
    MinerDiagnostics diag;
    std::exception_ptr fatal;
  };
  std::vector<Outcome> outcomes(jobs.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      auto& out = outcomes[i];
      const auto& job = jobs[i];
      try {
        const CommitRef ref =
            job.ref ? *job.ref : resolve_pull_request(*job.pull, fetcher, options, &out.diag);
        out.fix = fetch_commit_pair(ref, fetcher, options, &out.diag);
      } catch (const OrphanCommit& e) {
        ++out.diag.orphan_commits;
        out.diag.messages.push_back(job.cve_id + ": " + e.what());
      } catch (const CommitNotFound& e) {
        ++out.diag.missing_commits;
        out.diag.messages.push_back(job.cve_id + ": " + e.what());
      } catch (const MalformedResponse& e) {
        ++out.diag.malformed_responses;
        out.diag.messages.push_back(job.cve_id + ": " + e.what());
      } catch (...) {
        out.fatal = std::current_exception();
      }
    }
  };
  const unsigned workers =
      std::max(1u, std::min<unsigned>(fetcher.policy().max_parallel, static_cast<unsigned>(jobs.size())));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::vector<MinedFix> mined;
  std::set<std::tuple<std::string, std::string, std::string>> seen;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (outcomes[i].fatal) std::rethrow_exception(outcomes[i].fatal);
    diag.merge(outcomes[i].diag);
    if (!outcomes[i].fix) continue;
    const auto& c = outcomes[i].fix->commit;
    // A PR head may coincide with a directly linked commit of the same CVE.
    if (!seen.emplace(jobs[i].cve_id, c.project(), c.sha).second) continue;
    mined.push_back({jobs[i].cve_id, std::move(*outcomes[i].fix)});
  }
  return mined;
}

}  // namespace vulnforge
