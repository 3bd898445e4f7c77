#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "vulnforge/cve.hpp"
#include "vulnforge/net.hpp"

namespace vulnforge {

struct CommitRef {
  std::string host = "github.com";
  std::string owner;
  std::string repo;
  std::string sha;  // 40 lowercase hex

  std::string project() const { return owner + "/" + repo; }
  bool operator==(const CommitRef&) const = default;
};

bool is_full_sha(const std::string& sha);

struct PullRef {
  std::string owner;
  std::string repo;
  int number = 0;
  bool operator==(const PullRef&) const = default;
};

struct FileDelta {
  std::string path;
  std::optional<std::string> before_source;  // absent for added files
  std::optional<std::string> after_source;   // absent for deleted files
  std::string unified_diff;

  bool operator==(const FileDelta&) const = default;
};

struct FixCommit {
  CommitRef commit;
  CommitRef parent;
  std::string message;
  std::vector<FileDelta> deltas;

  bool operator==(const FixCommit&) const = default;
};

void to_json(nlohmann::json& j, const CommitRef& ref);
void from_json(const nlohmann::json& j, CommitRef& ref);
void to_json(nlohmann::json& j, const FileDelta& delta);
void from_json(const nlohmann::json& j, FileDelta& delta);
void to_json(nlohmann::json& j, const FixCommit& fix);
void from_json(const nlohmann::json& j, FixCommit& fix);

// Checks the FileDelta invariants: a source on at least one side, hunk
// ranges inside both sources, and that the diff reproduces after_source from
// before_source. Throws PatchMismatch.
void validate(const FileDelta& delta);

struct LinkDiagnostics {
  std::size_t non_commit_links = 0;
  std::size_t unrecognized_hosts = 0;
  std::size_t abbreviated_shas = 0;
  std::vector<PullRef> pull_requests;  // bare PR links, resolved separately
};

// One CommitRef per recognized GitHub commit link (commit pages, .patch and
// .diff links, PR commit links, API commit URLs), deduplicated by
// (owner, repo, sha) in reference order.
std::vector<CommitRef> extract_fix_links(const CveRecord& record,
                                         LinkDiagnostics* diagnostics = nullptr);

bool is_cpp_path(const std::string& path);

inline constexpr std::size_t kMaxSourceBytes = 1 << 20;

struct MinerOptions {
  std::optional<std::string> api_token;  // Authorization: Bearer
  std::string api_base = "https://api.github.com";
  std::string raw_base = "https://raw.githubusercontent.com";
};

struct MinerDiagnostics {
  std::size_t non_cpp_files = 0;
  std::size_t binary_files = 0;
  std::size_t oversized_files = 0;
  std::size_t missing_blobs = 0;
  std::size_t orphan_commits = 0;
  std::size_t missing_commits = 0;
  std::size_t malformed_responses = 0;
  std::vector<std::string> messages;

  void merge(const MinerDiagnostics& other);
};

// Head commit of a pull request. A merged PR whose merge commit differs from
// its head (squash or rebase) is noted in diagnostics, never guessed.
CommitRef resolve_pull_request(const PullRef& pull, Fetcher& fetcher,
                               const MinerOptions& options = {},
                               MinerDiagnostics* diagnostics = nullptr);

// Fetches the fix commit, its first parent, and full before/after sources of
// each changed C/C++ file. Throws CommitNotFound, OrphanCommit,
// NetworkUnavailable or MalformedResponse.
FixCommit fetch_commit_pair(const CommitRef& ref, Fetcher& fetcher,
                            const MinerOptions& options = {},
                            MinerDiagnostics* diagnostics = nullptr);

struct MinedFix {
  std::string cve_id;
  FixCommit fix;
};

void to_json(nlohmann::json& j, const MinedFix& mined);
void from_json(const nlohmann::json& j, MinedFix& mined);

// Runs extract_fix_links / resolve_pull_request / fetch_commit_pair for a
// batch of CVEs with at most policy.max_parallel concurrent fetches. Output
// order follows (CVE order, link order). Orphan, missing and malformed
// commits are skipped and counted; NetworkUnavailable propagates.
std::vector<MinedFix> mine_fix_commits(const std::vector<CveRecord>& cves, Fetcher& fetcher,
                                       const MinerOptions& options,
                                       MinerDiagnostics* diagnostics = nullptr,
                                       LinkDiagnostics* link_diagnostics = nullptr);

}  // namespace vulnforge
