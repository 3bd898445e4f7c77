#include "vulnforge/pipeline.hpp"

#include <chrono>
#include <map>
#include <thread>

#include "vulnforge/commit_miner.hpp"
#include "vulnforge/cwe.hpp"
#include "vulnforge/dataset_store.hpp"
#include "vulnforge/errors.hpp"
#include "vulnforge/function_extractor.hpp"
#include "vulnforge/hashing.hpp"
#include "vulnforge/text.hpp"

namespace vulnforge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_input(const std::string& stage, const fs::path& path, const char* producer) {
  if (!fs::exists(path)) {
    throw IoError("missing input " + path.string() + " (run " + producer + " first)");
  }
  (void)stage;
  return read_file(path);
}

template <typename T>
std::vector<T> read_jsonl(const std::string& text, const fs::path& origin) {
  std::vector<T> out;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    try {
      out.push_back(json::parse(lines[i]).get<T>());
    } catch (const json::exception& e) {
      throw SchemaMismatch(origin.string() + " line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

template <typename T>
std::string to_jsonl(const std::vector<T>& items) {
  std::string out;
  for (const auto& item : items) {
    out += json(item).dump();
    out.push_back('\n');
  }
  return out;
}

json miner_diagnostics_json(const MinerDiagnostics& d, const LinkDiagnostics& l) {
  return {{"non_cpp_files", d.non_cpp_files},
          {"binary_files", d.binary_files},
          {"oversized_files", d.oversized_files},
          {"missing_blobs", d.missing_blobs},
          {"orphan_commits", d.orphan_commits},
          {"missing_commits", d.missing_commits},
          {"malformed_responses", d.malformed_responses},
          {"non_commit_links", l.non_commit_links},
          {"unrecognized_hosts", l.unrecognized_hosts},
          {"abbreviated_shas", l.abbreviated_shas},
          {"pull_requests", l.pull_requests.size()},
          {"messages", d.messages}};
}

}  // namespace

void to_json(json& j, const StageRecord& r) {
  j = json{{"stage", r.stage},   {"status", r.status},           {"input_hash", r.input_hash},
           {"output", r.output}, {"counts", r.counts},           {"diagnostics", r.diagnostics},
           {"seconds", r.seconds}};
  if (!r.error.empty()) j["error"] = r.error;
}

void to_json(json& j, const RunLog& log) {
  j = json{{"started", log.started},
           {"finished", log.finished},
           {"command", log.command},
           {"offline", log.offline},
           {"network_requests", log.network_requests},
           {"exit_code", log.exit_code},
           {"stages", log.stages}};
}

std::string file_digest(const fs::path& path) {
  return sha256_hex(fs::exists(path) ? read_file(path) : std::string());
}

Pipeline::Pipeline(PipelineConfig config, std::shared_ptr<Transport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
  config_.validate();
  log_.started = utc_now_iso8601();
  log_.offline = config_.offline;
}

Fetcher& Pipeline::fetcher() {
  if (!fetcher_) {
    auto policy = config_.cache;
    Sleeper sleeper = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    std::shared_ptr<Transport> transport = transport_;
    if (!transport) {
      if (config_.replay_dir) {
        transport = std::make_shared<ReplayTransport>(*config_.replay_dir);
      } else if (config_.offline) {
        transport = std::make_shared<OfflineTransport>();
      } else {
        transport = std::make_shared<CurlTransport>();
      }
    }
    // Nothing to pace or retry when no real network is involved.
    if (config_.offline || config_.replay_dir || transport_) sleeper = [](std::chrono::milliseconds) {};
    if (config_.offline) policy.max_retries = 0;
    transport_ = transport;
    fetcher_ = std::make_unique<Fetcher>(policy, transport, sleeper);
  }
  return *fetcher_;
}

std::size_t Pipeline::network_requests() const {
  return fetcher_ ? fetcher_->network_requests() : 0;
}

bool Pipeline::stamp_matches(const std::string& stage, const std::string& input_hash,
                             const fs::path& output) const {
  const auto path = config_.work_dir / "stamps" / (stage + ".json");
  if (!fs::exists(path) || !fs::exists(output)) return false;
  try {
    const auto stamp = json::parse(read_file(path));
    return stamp.value("input_hash", "") == input_hash &&
           stamp.value("output_hash", "") == file_digest(output);
  } catch (const json::exception&) {
    return false;
  }
}

void Pipeline::write_stamp(const std::string& stage, const std::string& input_hash,
                           const fs::path& output) const {
  write_file_atomic(config_.work_dir / "stamps" / (stage + ".json"),
                    json{{"stage", stage}, {"input_hash", input_hash}, {"output_hash", file_digest(output)}}
                            .dump(2) +
                        "\n");
}

template <typename Body>
StageRecord Pipeline::run_stage(const std::string& name, const fs::path& output,
                                const std::string& input_hash, Body&& body) {
  StageRecord record;
  record.stage = name;
  record.output = output.string();
  record.input_hash = input_hash;
  const auto t0 = std::chrono::steady_clock::now();
  const auto finish = [&] {
    record.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    log_.stages.push_back(record);
    log_.network_requests = network_requests();
  };
  if (stamp_matches(name, input_hash, output)) {
    record.status = "skipped";
    finish();
    return record;
  }
  try {
    body(record);
    write_stamp(name, input_hash, output);
    record.status = "ran";
  } catch (const Error& e) {
    record.status = "failed";
    record.error = e.kind() + ": " + e.what();
    finish();
    throw Error(e.kind(), "stage " + name + " (" + output.string() + "): " + e.what());
  }
  finish();
  return record;
}

StageRecord Pipeline::fetch_cves() {
  const auto keywords = config_.all_keywords();
  json inputs = {{"keywords", keywords},
                 {"threshold", config_.severity_threshold},
                 {"endpoint", config_.cve.endpoint}};
  if (config_.date_range) inputs["date_range"] = {config_.date_range->start, config_.date_range->end};
  const auto hash = sha256_hex("fetch-cves\n" + inputs.dump());
  return run_stage("fetch-cves", cves_path(), hash, [&](StageRecord& r) {
    auto options = config_.cve;
    options.date_range = config_.date_range;
    const auto all = query_cves(keywords, fetcher(), options);
    const auto kept = filter_by_severity(all, config_.severity_threshold);
    write_file_atomic(cves_path(), to_ndjson(kept));
    r.counts = {{"queried", all.size()},
                {"retained", kept.size()},
                {"below_threshold_or_unscored", all.size() - kept.size()}};
  });
}

StageRecord Pipeline::mine_commits() {
  const auto hash = sha256_hex("mine-commits\n" + file_digest(cves_path()) + "\n" +
                               config_.miner.api_base + "\n" + config_.miner.raw_base);
  return run_stage("mine-commits", fixes_path(), hash, [&](StageRecord& r) {
    const auto cves = cves_from_ndjson(read_input("mine-commits", cves_path(), "fetch-cves"));
    MinerDiagnostics diag;
    LinkDiagnostics links;
    const auto fixes = mine_fix_commits(cves, fetcher(), config_.miner, &diag, &links);
    write_file_atomic(fixes_path(), to_jsonl(fixes));
    std::size_t deltas = 0;
    for (const auto& f : fixes) deltas += f.fix.deltas.size();
    r.counts = {{"cves", cves.size()}, {"fix_commits", fixes.size()}, {"file_deltas", deltas}};
    r.diagnostics = miner_diagnostics_json(diag, links);
  });
}

StageRecord Pipeline::extract() {
  const auto catalog_digest = config_.cwe_catalog ? file_digest(*config_.cwe_catalog) : std::string();
  const auto hash = sha256_hex("extract\n" + file_digest(fixes_path()) + "\n" + file_digest(cves_path()) +
                               "\n" + catalog_digest + "\n" +
                               (config_.build.include_unchanged ? "unchanged" : ""));
  return run_stage("extract", samples_path(), hash, [&](StageRecord& r) {
    const auto fixes =
        read_jsonl<MinedFix>(read_input("extract", fixes_path(), "mine-commits"), fixes_path());
    const auto cves = cves_from_ndjson(read_input("extract", cves_path(), "fetch-cves"));
    std::map<std::string, CveRecord> by_id;
    for (const auto& c : cves) by_id.emplace(c.cve_id, c);
    CweCatalog catalog;
    if (config_.cwe_catalog) catalog = load_catalog(*config_.cwe_catalog);

    BuildDiagnostics diag;
    std::vector<FunctionSample> samples;
    std::size_t unknown_cwe = 0;
    for (const auto& mined : fixes) {
      const auto it = by_id.find(mined.cve_id);
      if (it == by_id.end()) {
        throw IntegrityFailure("fix for " + mined.cve_id + " has no advisory in " + cves_path().string());
      }
      std::optional<CweInfo> cwe;
      if (!it->second.cwe_ids.empty()) {
        cwe = catalog.lookup(it->second.cwe_ids.front());
        if (!cwe) ++unknown_cwe;
      }
      auto built = build_samples(mined.fix, it->second, cwe, config_.build, &diag);
      samples.insert(samples.end(), std::make_move_iterator(built.begin()),
                     std::make_move_iterator(built.end()));
    }
    write_file_atomic(samples_path(), to_jsonl(samples));
    std::size_t vulnerable = 0;
    for (const auto& s : samples) vulnerable += s.label == 1 ? 1 : 0;
    r.counts = {{"fix_commits", fixes.size()},
                {"samples", samples.size()},
                {"vulnerable", vulnerable},
                {"secure", samples.size() - vulnerable}};
    r.diagnostics = {{"skipped_regions", diag.extraction.skipped_regions},
                     {"unterminated", diag.extraction.unterminated},
                     {"replaced_bytes", diag.extraction.replaced_bytes},
                     {"dropped_overlaps", diag.extraction.dropped_overlaps},
                     {"unclosed", diag.extraction.unclosed},
                     {"alignment_ambiguous", diag.alignment.ambiguous},
                     {"added_functions", diag.alignment.added_functions},
                     {"invalid_deltas", diag.invalid_deltas},
                     {"unknown_cwe", unknown_cwe},
                     {"messages", diag.alignment.messages}};
  });
}

StageRecord Pipeline::curate() {
  std::string inputs = "curate\n" + file_digest(samples_path()) + "\n" + json(config_.curation).dump();
  for (const auto& spec : config_.imports) {
    inputs += "\n" + spec.adapter + ":" + file_digest(spec.path);
  }
  const auto manifest = dataset_dir() / "manifest.json";
  return run_stage("curate", manifest, sha256_hex(inputs), [&](StageRecord& r) {
    auto samples = read_jsonl<FunctionSample>(read_input("curate", samples_path(), "extract"), samples_path());
    const auto extracted = samples.size();
    std::size_t import_rejected = 0;
    json import_messages = json::array();
    for (const auto& spec : config_.imports) {
      if (!fs::exists(spec.path)) throw IoError("import file " + spec.path.string() + " does not exist");
      std::vector<ImportDiagnostic> diag;
      auto rows = import_external(spec.path, spec.adapter, &diag);
      import_rejected += diag.size();
      for (const auto& d : diag) {
        import_messages.push_back(spec.path.string() + " row " + std::to_string(d.row) + ": " + d.message);
      }
      samples.insert(samples.end(), std::make_move_iterator(rows.begin()),
                     std::make_move_iterator(rows.end()));
    }

    auto result = vulnforge::curate(samples, config_.curation);
    Dataset d;
    d.samples = std::move(result.samples);
    d.splits = std::move(result.splits);
    d.manifest = make_manifest(d.samples, d.splits, config_.curation);
    d.report = result.report;
    d.hard_negatives = std::move(result.hard_negatives);
    write_dataset(d, dataset_dir());

    r.counts = json(d.report);
    r.counts["extracted"] = extracted;
    r.counts["imported"] = samples.size() - extracted;
    for (const auto& [split, c] : d.manifest.counts) {
      r.counts["split_" + split] = c[0] + c[1];
    }
    r.counts["content_hash"] = d.manifest.content_hash;
    r.diagnostics = {{"import_rejected", import_rejected}, {"messages", import_messages}};
  });
}

std::vector<StageRecord> Pipeline::build() {
  DatasetLock lock(config_.work_dir, ".pipeline.lock");
  std::vector<StageRecord> out;
  const auto disabled = [&](const std::string& name) {
    StageRecord r;
    r.stage = name;
    r.status = "disabled";
    log_.stages.push_back(r);
    out.push_back(r);
  };
  config_.stages.fetch ? out.push_back(fetch_cves()) : disabled("fetch-cves");
  config_.stages.mine ? out.push_back(mine_commits()) : disabled("mine-commits");
  config_.stages.extract ? out.push_back(extract()) : disabled("extract");
  config_.stages.curate ? out.push_back(curate()) : disabled("curate");
  return out;
}

void Pipeline::write_log(const std::optional<fs::path>& path) {
  log_.finished = utc_now_iso8601();
  log_.network_requests = network_requests();
  write_file_atomic(path ? *path : log_path(), json(log_).dump(2) + "\n");
}

}  // namespace vulnforge
