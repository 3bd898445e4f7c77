#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "vulnforge/commit_miner.hpp"
#include "vulnforge/curator.hpp"
#include "vulnforge/cve.hpp"
#include "vulnforge/eval.hpp"
#include "vulnforge/function_extractor.hpp"
#include "vulnforge/net.hpp"

namespace vulnforge {

struct ImportSpec {
  std::filesystem::path path;
  std::string adapter;
};

struct StageToggles {
  bool fetch = true;
  bool mine = true;
  bool extract = true;
  bool curate = true;
};

// Parsed from a TOML file:
//
//   [pipeline]   keywords, keywords_file, severity_threshold, date_start,
//                date_end, cwe_catalog, work_dir, dataset_dir,
//                include_unchanged
//   [stages]     fetch, mine, extract, curate
//   [cache]      dir, max_age_days, rate_limit, max_retries, backoff_ms,
//                max_parallel, replay_dir
//   [endpoints]  cve, github_api, github_raw
//   [curation]   dedup_normalization, drop_whitespace_only_fixes,
//                hard_negative_max_distance, balance_tolerance,
//                split_ratios, split_mode, seed
//   [baseline]   ngram_max, min_token_freq, epochs, learning_rate, l2
//   [[import]]   path, adapter
//
// Relative paths resolve against the config file's directory. Precedence:
// command-line flag, then environment, then file, then built-in default.
struct PipelineConfig {
  std::filesystem::path base_dir = ".";
  std::vector<std::string> keywords;
  std::optional<std::filesystem::path> keywords_file;
  double severity_threshold = 5.0;
  std::optional<DateRange> date_range;
  std::optional<std::filesystem::path> cwe_catalog;
  std::filesystem::path work_dir = "vulnforge-out";
  std::optional<std::filesystem::path> dataset_dir;  // default <work_dir>/dataset
  BuildOptions build;
  StageToggles stages;
  FetchCachePolicy cache;
  std::optional<std::filesystem::path> replay_dir;  // recorded responses served offline
  CveQueryOptions cve;
  MinerOptions miner;
  CurationConfig curation;
  TrainingConfig baseline;
  std::vector<ImportSpec> imports;
  bool offline = false;

  std::filesystem::path resolved_dataset_dir() const;

  // Keywords from the list plus keywords_file (one per line, '#' comments).
  std::vector<std::string> all_keywords() const;

  // Throws ConfigError.
  void validate() const;
};

// Throws ConfigError naming the key or the parse position.
PipelineConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = ".");
PipelineConfig load_config(const std::filesystem::path& path);

// VULNFORGE_CVE_TOKEN, VULNFORGE_GIT_TOKEN, VULNFORGE_CACHE_DIR.
void apply_environment(PipelineConfig& config);

// Canonical JSON of the settings that influence stage outputs.
nlohmann::json settings_json(const PipelineConfig& config);

}  // namespace vulnforge
