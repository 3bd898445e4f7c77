#include "vulnforge/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <set>

#include <nlohmann/json.hpp>
#include <toml.hpp>

#include "vulnforge/errors.hpp"
#include "vulnforge/text.hpp"

namespace vulnforge {

namespace fs = std::filesystem;

namespace {

const std::map<std::string, std::set<std::string>> kKnownKeys = {
    {"pipeline",
     {"keywords", "keywords_file", "severity_threshold", "date_start", "date_end", "cwe_catalog",
      "work_dir", "dataset_dir", "include_unchanged"}},
    {"stages", {"fetch", "mine", "extract", "curate"}},
    {"cache", {"dir", "max_age_days", "rate_limit", "max_retries", "backoff_ms", "max_parallel", "replay_dir"}},
    {"endpoints", {"cve", "github_api", "github_raw"}},
    {"curation",
     {"dedup_normalization", "drop_whitespace_only_fixes", "hard_negative_max_distance",
      "balance_tolerance", "split_ratios", "split_mode", "seed"}},
    {"baseline", {"ngram_max", "min_token_freq", "epochs", "learning_rate", "l2"}},
};

class Reader {
 public:
  Reader(const toml::table& table, std::string section, const fs::path& base)
      : table_(table), section_(std::move(section)), base_(base) {}

  template <typename T>
  void get(const char* key, T& out) const {
    const auto* node = table_.get(key);
    if (!node) return;
    if constexpr (std::is_same_v<T, double>) {
      if (auto v = node->value<double>()) {
        out = *v;
        return;
      }
    } else if constexpr (std::is_same_v<T, bool>) {
      if (auto v = node->value_exact<bool>()) {
        out = *v;
        return;
      }
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (auto v = node->value_exact<std::string>()) {
        out = *v;
        return;
      }
    } else {
      if (auto v = node->value_exact<std::int64_t>()) {
        if (*v < 0) fail(key, "must not be negative");
        out = static_cast<T>(*v);
        return;
      }
    }
    fail(key, "has the wrong type");
  }

  void path(const char* key, fs::path& out) const {
    std::string text;
    if (!table_.get(key)) return;
    get(key, text);
    out = resolve(text);
  }

  void path(const char* key, std::optional<fs::path>& out) const {
    if (!table_.get(key)) return;
    fs::path p;
    path(key, p);
    out = p;
  }

  std::vector<std::string> strings(const char* key) const {
    std::vector<std::string> out;
    const auto* node = table_.get(key);
    if (!node) return out;
    const auto* array = node->as_array();
    if (!array) fail(key, "must be an array of strings");
    for (const auto& item : *array) {
      const auto v = item.value_exact<std::string>();
      if (!v) fail(key, "must be an array of strings");
      out.push_back(*v);
    }
    return out;
  }

  std::vector<double> numbers(const char* key) const {
    std::vector<double> out;
    const auto* node = table_.get(key);
    if (!node) return out;
    const auto* array = node->as_array();
    if (!array) fail(key, "must be an array of numbers");
    for (const auto& item : *array) {
      const auto v = item.value<double>();
      if (!v) fail(key, "must be an array of numbers");
      out.push_back(*v);
    }
    return out;
  }

  fs::path resolve(const std::string& text) const {
    fs::path p(text);
    return p.is_absolute() ? p : base_ / p;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ConfigError(section_ + "." + key + " " + what);
  }

 private:
  const toml::table& table_;
  std::string section_;
  fs::path base_;
};

const toml::table& section(const toml::table& root, const std::string& name) {
  static const toml::table empty;
  const auto* node = root.get(name);
  if (!node) return empty;
  const auto* table = node->as_table();
  if (!table) throw ConfigError("[" + name + "] must be a table");
  return *table;
}

}  // namespace

fs::path PipelineConfig::resolved_dataset_dir() const {
  return dataset_dir ? *dataset_dir : work_dir / "dataset";
}

std::vector<std::string> PipelineConfig::all_keywords() const {
  std::vector<std::string> out = keywords;
  if (keywords_file) {
    if (!fs::exists(*keywords_file)) {
      throw ConfigError("keywords_file " + keywords_file->string() + " does not exist");
    }
    for (const auto& line : split_lines(read_file(*keywords_file))) {
      auto text = trim(line);
      if (text.empty() || text.front() == '#') continue;
      out.emplace_back(text);
    }
  }
  return out;
}

void PipelineConfig::validate() const {
  if (!(severity_threshold >= 0.0 && severity_threshold <= 10.0)) {
    throw ConfigError("pipeline.severity_threshold must lie in [0, 10]");
  }
  try {
    cache.validate();
    curation.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  for (const auto& spec : imports) {
    const auto& known = import_adapters();
    if (std::find(known.begin(), known.end(), spec.adapter) == known.end()) {
      throw ConfigError("import adapter '" + spec.adapter + "' is unknown");
    }
  }
}

PipelineConfig parse_config(std::string_view text, const fs::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    const auto& where = e.source().begin;
    throw ConfigError("line " + std::to_string(where.line) + ", column " +
                      std::to_string(where.column) + ": " + std::string(e.description()));
  }

  for (const auto& [key, node] : root) {
    const std::string name(key.str());
    if (name == "import") continue;
    const auto known = kKnownKeys.find(name);
    if (known == kKnownKeys.end()) throw ConfigError("unknown section [" + name + "]");
    if (const auto* table = node.as_table()) {
      for (const auto& [k, v] : *table) {
        if (!known->second.count(std::string(k.str()))) {
          throw ConfigError("unknown key " + name + "." + std::string(k.str()));
        }
      }
    }
  }

  PipelineConfig c;
  c.base_dir = base_dir;
  c.work_dir = base_dir / c.work_dir;

  const Reader pipeline(section(root, "pipeline"), "pipeline", base_dir);
  c.keywords = pipeline.strings("keywords");
  pipeline.path("keywords_file", c.keywords_file);
  pipeline.get("severity_threshold", c.severity_threshold);
  std::string start, end;
  pipeline.get("date_start", start);
  pipeline.get("date_end", end);
  if (start.empty() != end.empty()) throw ConfigError("pipeline.date_start and date_end go together");
  if (!start.empty()) c.date_range = DateRange{start, end};
  pipeline.path("cwe_catalog", c.cwe_catalog);
  pipeline.path("work_dir", c.work_dir);
  pipeline.path("dataset_dir", c.dataset_dir);
  pipeline.get("include_unchanged", c.build.include_unchanged);

  const Reader stages(section(root, "stages"), "stages", base_dir);
  stages.get("fetch", c.stages.fetch);
  stages.get("mine", c.stages.mine);
  stages.get("extract", c.stages.extract);
  stages.get("curate", c.stages.curate);

  const Reader cache(section(root, "cache"), "cache", base_dir);
  c.cache.cache_dir = base_dir / c.cache.cache_dir;
  cache.path("dir", c.cache.cache_dir);
  double max_age_days = static_cast<double>(c.cache.max_age.count()) / 86400.0;
  cache.get("max_age_days", max_age_days);
  c.cache.max_age = std::chrono::seconds(static_cast<long long>(max_age_days * 86400.0));
  cache.get("rate_limit", c.cache.rate_limit);
  cache.get("max_retries", c.cache.max_retries);
  std::int64_t backoff = c.cache.backoff_base.count();
  cache.get("backoff_ms", backoff);
  c.cache.backoff_base = std::chrono::milliseconds(backoff);
  cache.get("max_parallel", c.cache.max_parallel);
  cache.path("replay_dir", c.replay_dir);

  const Reader endpoints(section(root, "endpoints"), "endpoints", base_dir);
  endpoints.get("cve", c.cve.endpoint);
  endpoints.get("github_api", c.miner.api_base);
  endpoints.get("github_raw", c.miner.raw_base);

  const Reader curation(section(root, "curation"), "curation", base_dir);
  std::string text_value;
  try {
    if (section(root, "curation").get("dedup_normalization")) {
      curation.get("dedup_normalization", text_value);
      c.curation.dedup_normalization = normalization_from_string(text_value);
    }
    if (section(root, "curation").get("split_mode")) {
      curation.get("split_mode", text_value);
      c.curation.split_mode = split_mode_from_string(text_value);
    }
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("curation: ") + e.what());
  }
  curation.get("drop_whitespace_only_fixes", c.curation.drop_whitespace_only_fixes);
  curation.get("hard_negative_max_distance", c.curation.hard_negative_max_distance);
  curation.get("balance_tolerance", c.curation.balance_tolerance);
  const auto ratios = curation.numbers("split_ratios");
  if (!ratios.empty()) {
    if (ratios.size() != 3) throw ConfigError("curation.split_ratios needs three values");
    c.curation.split_ratios = {ratios[0], ratios[1], ratios[2]};
  }
  curation.get("seed", c.curation.seed);

  const Reader baseline(section(root, "baseline"), "baseline", base_dir);
  baseline.get("ngram_max", c.baseline.ngram_max);
  baseline.get("min_token_freq", c.baseline.min_token_freq);
  baseline.get("epochs", c.baseline.epochs);
  baseline.get("learning_rate", c.baseline.learning_rate);
  baseline.get("l2", c.baseline.l2);
  c.baseline.seed = c.curation.seed;

  if (const auto* imports = root.get("import")) {
    const auto* array = imports->as_array();
    if (!array) throw ConfigError("[[import]] must be an array of tables");
    for (const auto& item : *array) {
      const auto* table = item.as_table();
      if (!table) throw ConfigError("[[import]] must be an array of tables");
      const Reader r(*table, "import", base_dir);
      ImportSpec spec;
      r.path("path", spec.path);
      r.get("adapter", spec.adapter);
      if (spec.path.empty() || spec.adapter.empty()) throw ConfigError("[[import]] needs path and adapter");
      c.imports.push_back(std::move(spec));
    }
  }
  c.validate();
  return c;
}

PipelineConfig load_config(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("config file " + path.string() + " does not exist");
  try {
    return parse_config(read_file(path), path.parent_path().empty() ? fs::path(".") : path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void apply_environment(PipelineConfig& config) {
  if (const char* v = std::getenv("VULNFORGE_CVE_TOKEN"); v && *v) config.cve.api_token = v;
  if (const char* v = std::getenv("VULNFORGE_GIT_TOKEN"); v && *v) config.miner.api_token = v;
  if (const char* v = std::getenv("VULNFORGE_CACHE_DIR"); v && *v) config.cache.cache_dir = v;
}

nlohmann::json settings_json(const PipelineConfig& c) {
  nlohmann::json j;
  j["keywords"] = c.all_keywords();
  j["severity_threshold"] = c.severity_threshold;
  if (c.date_range) j["date_range"] = {c.date_range->start, c.date_range->end};
  j["cve_endpoint"] = c.cve.endpoint;
  j["github_api"] = c.miner.api_base;
  j["github_raw"] = c.miner.raw_base;
  j["include_unchanged"] = c.build.include_unchanged;
  j["curation"] = c.curation;
  j["baseline"] = c.baseline;
  return j;
}

}  // namespace vulnforge
