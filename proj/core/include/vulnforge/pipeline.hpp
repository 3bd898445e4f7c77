#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vulnforge/config.hpp"
#include "vulnforge/net.hpp"

namespace vulnforge {

struct StageRecord {
  std::string stage;
  std::string status;  // ran, skipped (unchanged inputs), disabled, failed
  std::string input_hash;
  std::string output;
  nlohmann::json counts = nlohmann::json::object();
  nlohmann::json diagnostics = nlohmann::json::object();
  double seconds = 0.0;
  std::string error;
};

void to_json(nlohmann::json& j, const StageRecord& record);

struct RunLog {
  std::string started;
  std::string finished;
  std::string command;
  bool offline = false;
  std::size_t network_requests = 0;
  int exit_code = 0;
  std::vector<StageRecord> stages;
};

void to_json(nlohmann::json& j, const RunLog& log);

// Stage outputs under work_dir: cves.jsonl, fixes.jsonl, samples.jsonl, then
// the dataset directory. Each stage stamps the hash of its inputs under
// work_dir/stamps and is skipped when the stamp and output are unchanged.
class Pipeline {
 public:
  // Without an injected transport: recorded responses when cache.replay_dir
  // is set, a refusing transport when offline, libcurl otherwise.
  explicit Pipeline(PipelineConfig config, std::shared_ptr<Transport> transport = nullptr);

  StageRecord fetch_cves();
  StageRecord mine_commits();
  StageRecord extract();
  StageRecord curate();
  // Runs the enabled stages in order; stops at the first failure (rethrown).
  std::vector<StageRecord> build();

  std::filesystem::path cves_path() const { return config_.work_dir / "cves.jsonl"; }
  std::filesystem::path fixes_path() const { return config_.work_dir / "fixes.jsonl"; }
  std::filesystem::path samples_path() const { return config_.work_dir / "samples.jsonl"; }
  std::filesystem::path dataset_dir() const { return config_.resolved_dataset_dir(); }
  std::filesystem::path log_path() const { return config_.work_dir / "run_log.json"; }

  const PipelineConfig& config() const noexcept { return config_; }
  RunLog& log() noexcept { return log_; }
  Fetcher& fetcher();
  std::size_t network_requests() const;

  // Writes run_log.json (to `path` when given).
  void write_log(const std::optional<std::filesystem::path>& path = std::nullopt);

 private:
  template <typename Body>
  StageRecord run_stage(const std::string& name, const std::filesystem::path& output,
                        const std::string& input_hash, Body&& body);
  bool stamp_matches(const std::string& stage, const std::string& input_hash,
                     const std::filesystem::path& output) const;
  void write_stamp(const std::string& stage, const std::string& input_hash,
                   const std::filesystem::path& output) const;

  PipelineConfig config_;
  std::shared_ptr<Transport> transport_;
  std::unique_ptr<Fetcher> fetcher_;
  RunLog log_;
};

// Hash of a file's bytes, or of the empty string when it does not exist.
std::string file_digest(const std::filesystem::path& path);

}  // namespace vulnforge
