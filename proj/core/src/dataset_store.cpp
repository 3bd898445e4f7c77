#include "vulnforge/dataset_store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstring>
#include <set>

#include <nlohmann/json.hpp>

#include "vulnforge/csv.hpp"
#include "vulnforge/diff.hpp"
#include "vulnforge/errors.hpp"
#include "vulnforge/hashing.hpp"
#include "vulnforge/text.hpp"

namespace vulnforge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string dump(const json& j) { return j.dump(-1, ' ', false, json::error_handler_t::strict); }

std::string join_ints(const std::vector<int>& values, int offset) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out.push_back(';');
    out += std::to_string(values[i] + offset);
  }
  return out;
}

std::vector<int> parse_ints(std::string_view cell, const std::string& column) {
  std::vector<int> out;
  if (cell.empty()) return out;
  std::size_t pos = 0;
  while (pos <= cell.size()) {
    const auto next = std::min(cell.find(';', pos), cell.size());
    const auto part = cell.substr(pos, next - pos);
    int value = 0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
    if (ec != std::errc{} || ptr != part.data() + part.size()) {
      throw SchemaMismatch("column " + column + ": '" + std::string(cell) + "' is not a ;-joined integer list");
    }
    out.push_back(value);
    pos = next + 1;
  }
  return out;
}

std::vector<std::string> parse_quotes(const std::string& cell, const std::string& column) {
  if (cell.empty()) return {};
  try {
    return json::parse(cell).get<std::vector<std::string>>();
  } catch (const json::exception&) {
    throw SchemaMismatch("column " + column + ": not a JSON array of strings");
  }
}

std::string opt_cell(const std::optional<std::string>& v) { return v ? *v : std::string(); }
std::optional<std::string> cell_opt(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  return cell;
}

std::array<std::size_t, 2>& count_slot(DatasetManifest& m, Split split) {
  return m.counts[to_string(split)];
}

}  // namespace

void to_json(json& j, const DatasetManifest& m) {
  json counts = json::object();
  for (const auto& [split, c] : m.counts) counts[split] = {{"label_0", c[0]}, {"label_1", c[1]}};
  json sources = json::array();
  for (const auto& s : m.sources) sources.push_back({{"name", s.name}, {"count", s.count}});
  j = json{{"schema_version", m.schema_version}, {"created", m.created},
           {"config_hash", m.config_hash},       {"counts", counts},
           {"sources", sources},                 {"content_hash", m.content_hash},
           {"digest_algorithm", m.digest_algorithm}, {"total", m.total}};
}

void from_json(const json& j, DatasetManifest& m) {
  m.schema_version = j.at("schema_version").get<std::string>();
  m.created = j.value("created", "");
  m.config_hash = j.value("config_hash", "");
  m.counts.clear();
  for (const auto& [split, c] : j.at("counts").items()) {
    m.counts[split] = {c.at("label_0").get<std::size_t>(), c.at("label_1").get<std::size_t>()};
  }
  m.sources.clear();
  for (const auto& s : j.value("sources", json::array())) {
    m.sources.push_back({s.at("name").get<std::string>(), s.at("count").get<std::size_t>()});
  }
  m.content_hash = j.at("content_hash").get<std::string>();
  m.digest_algorithm = j.value("digest_algorithm", "sha256");
  m.total = j.at("total").get<std::size_t>();
}

std::string canonical_record(const FunctionSample& sample, Split split) {
  json j = sample;
  j["split"] = to_string(split);
  return dump(j);
}

std::string content_hash(const std::vector<FunctionSample>& samples, const SplitAssignment& splits) {
  std::string bytes;
  for (const auto& s : samples) {
    const auto it = splits.find(s.sample_id);
    if (it == splits.end()) throw InvalidArgument("sample " + s.sample_id + " has no split");
    bytes += canonical_record(s, it->second);
    bytes.push_back('\n');
  }
  return sha256_hex(bytes);
}

std::string config_hash(const CurationConfig& config) {
  return sha256_hex(dump(json(config)));
}

DatasetManifest make_manifest(std::vector<FunctionSample>& samples, const SplitAssignment& splits,
                              const CurationConfig& config, std::string created) {
  std::stable_sort(samples.begin(), samples.end(),
                   [](const auto& a, const auto& b) { return a.sample_id < b.sample_id; });
  DatasetManifest m;
  m.created = created.empty() ? utc_now_iso8601() : std::move(created);
  m.config_hash = config_hash(config);
  for (Split s : {Split::train, Split::validation, Split::test}) count_slot(m, s) = {0, 0};
  std::map<std::string, std::size_t> sources;
  for (const auto& s : samples) {
    const auto it = splits.find(s.sample_id);
    if (it == splits.end()) throw InvalidArgument("sample " + s.sample_id + " has no split");
    ++count_slot(m, it->second)[s.label == 1 ? 1 : 0];
    ++sources[s.source];
  }
  for (const auto& [name, count] : sources) m.sources.push_back({name, count});
  m.content_hash = content_hash(samples, splits);
  m.total = samples.size();
  return m;
}

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> columns = {
      "sample_id",     "label",         "function_before", "function_after", "cwe_id",
      "cwe_title",     "cwe_description", "vuln_index",    "vuln_line_no",   "vulnerable_code",
      "patch_index",   "patch_line_no", "patch_code",      "project",        "commit_sha",
      "cve_id",        "pair_id",       "split"};
  return columns;
}

std::string samples_to_csv(const std::vector<FunctionSample>& samples, const SplitAssignment& splits) {
  std::string out = csv::format_row(csv_columns());
  for (const auto& s : samples) {
    const auto it = splits.find(s.sample_id);
    if (it == splits.end()) throw InvalidArgument("sample " + s.sample_id + " has no split");
    out += csv::format_row({s.sample_id,
                            std::to_string(s.label),
                            opt_cell(s.function_before),
                            opt_cell(s.function_after),
                            s.cwe_id,
                            s.cwe_title,
                            s.cwe_description,
                            join_ints(s.flaw_line_nos, -1),
                            join_ints(s.flaw_line_nos, 0),
                            s.flaw_lines.empty() ? std::string() : dump(json(s.flaw_lines)),
                            join_ints(s.patch_line_nos, -1),
                            join_ints(s.patch_line_nos, 0),
                            s.patch_lines.empty() ? std::string() : dump(json(s.patch_lines)),
                            s.project,
                            s.commit_sha,
                            s.cve_id,
                            opt_cell(s.pair_id),
                            to_string(it->second)});
  }
  return out;
}

std::pair<std::vector<FunctionSample>, SplitAssignment> samples_from_csv(std::string_view text) {
  const auto records = csv::parse(text);
  if (records.empty()) throw SchemaMismatch("samples.csv: missing header row");
  const auto& header = records.front().fields;
  const auto& expected = csv_columns();
  for (const auto& column : expected) {
    if (std::find(header.begin(), header.end(), column) == header.end()) {
      throw SchemaMismatch("samples.csv: missing column '" + column + "'");
    }
  }
  for (const auto& column : header) {
    if (std::find(expected.begin(), expected.end(), column) == expected.end()) {
      throw SchemaMismatch("samples.csv: unexpected column '" + column + "'");
    }
  }
  if (header != expected) throw SchemaMismatch("samples.csv: columns out of order");

  std::pair<std::vector<FunctionSample>, SplitAssignment> out;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& f = records[r].fields;
    const auto where = "samples.csv line " + std::to_string(records[r].line) + ": ";
    if (f.size() != expected.size()) {
      throw SchemaMismatch(where + "expected " + std::to_string(expected.size()) + " fields, got " +
                           std::to_string(f.size()));
    }
    FunctionSample s;
    s.sample_id = f[0];
    if (f[1] != "0" && f[1] != "1") throw SchemaMismatch(where + "label must be 0 or 1");
    s.label = f[1] == "1" ? 1 : 0;
    s.function_before = cell_opt(f[2]);
    s.function_after = cell_opt(f[3]);
    s.cwe_id = f[4];
    s.cwe_title = f[5];
    s.cwe_description = f[6];
    const auto vuln_index = parse_ints(f[7], "vuln_index");
    s.flaw_line_nos = parse_ints(f[8], "vuln_line_no");
    s.flaw_lines = parse_quotes(f[9], "vulnerable_code");
    const auto patch_index = parse_ints(f[10], "patch_index");
    s.patch_line_nos = parse_ints(f[11], "patch_line_no");
    s.patch_lines = parse_quotes(f[12], "patch_code");
    for (auto [index, line] : {std::pair{&vuln_index, &s.flaw_line_nos}, std::pair{&patch_index, &s.patch_line_nos}}) {
      bool consistent = index->size() == line->size();
      for (std::size_t k = 0; consistent && k < index->size(); ++k) {
        consistent = (*index)[k] + 1 == (*line)[k];
      }
      if (!consistent) throw SchemaMismatch(where + "index column disagrees with line number column");
    }
    s.project = f[13];
    s.commit_sha = f[14];
    s.cve_id = f[15];
    s.pair_id = cell_opt(f[16]);
    try {
      out.second[s.sample_id] = split_from_string(f[17]);
    } catch (const InvalidArgument& e) {
      throw SchemaMismatch(where + e.what());
    }
    out.first.push_back(std::move(s));
  }
  return out;
}

DatasetLock::DatasetLock(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  const auto path = dir / name;
  fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) throw IoError("cannot open " + path.string() + ": " + std::strerror(errno));
  if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd_);
    fd_ = -1;
    throw DatasetLocked("dataset " + dir.string() + " is locked by another writer");
  }
}

DatasetLock::~DatasetLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

void write_dataset(const Dataset& d, const fs::path& dir) {
  std::set<std::string> ids;
  for (const auto& s : d.samples) {
    const auto problems = check_invariants(s);
    if (!problems.empty()) {
      throw InvalidArgument("sample " + s.sample_id + " violates invariants: " + problems.front());
    }
    if (!ids.insert(s.sample_id).second) throw InvalidArgument("duplicate sample_id " + s.sample_id);
    if (!d.splits.count(s.sample_id)) throw InvalidArgument("sample " + s.sample_id + " has no split");
  }
  if (d.splits.size() != d.samples.size()) {
    throw InvalidArgument("split assignment names samples that are not in the dataset");
  }
  if (d.manifest.content_hash != content_hash(d.samples, d.splits)) {
    throw IntegrityFailure("manifest content_hash does not match the samples being written");
  }

  DatasetLock lock(dir);
  std::string jsonl;
  for (const auto& s : d.samples) {
    jsonl += canonical_record(s, d.splits.at(s.sample_id));
    jsonl.push_back('\n');
  }
  std::string negatives;
  for (const auto& p : d.hard_negatives) {
    negatives += dump(json(p));
    negatives.push_back('\n');
  }
  write_file_atomic(dir / "samples.jsonl", jsonl);
  write_file_atomic(dir / "samples.csv", samples_to_csv(d.samples, d.splits));
  write_file_atomic(dir / "curation_report.json", json(d.report).dump(2) + "\n");
  write_file_atomic(dir / "hard_negatives.jsonl", negatives);
  // Manifest last: readers treat its presence as completion.
  write_file_atomic(dir / "manifest.json", json(d.manifest).dump(2) + "\n");
}

Dataset read_dataset(const fs::path& dir) {
  Dataset d;
  const auto manifest_path = dir / "manifest.json";
  if (!fs::exists(manifest_path)) throw IoError("no manifest.json in " + dir.string());
  try {
    d.manifest = json::parse(read_file(manifest_path)).get<DatasetManifest>();
  } catch (const json::exception& e) {
    throw SchemaMismatch(manifest_path.string() + ": " + e.what());
  }
  if (d.manifest.schema_version != kSchemaVersion) {
    throw SchemaMismatch(manifest_path.string() + ": schema_version '" + d.manifest.schema_version +
                         "', expected '" + std::string(kSchemaVersion) + "'");
  }

  const auto csv_path = dir / "samples.csv";
  if (fs::exists(csv_path)) {
    const auto text = read_file(csv_path);
    const auto header = csv::parse(text.substr(0, text.find('\n') + 1));
    if (header.empty() || header.front().fields != csv_columns()) {
      // Full check for the message naming the column.
      samples_from_csv(text.substr(0, text.find('\n') + 1));
      throw SchemaMismatch(csv_path.string() + ": header differs from the schema");
    }
  }

  const auto samples_path = dir / "samples.jsonl";
  const auto lines = split_lines(read_file(samples_path));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    try {
      const auto j = json::parse(lines[i]);
      auto s = j.get<FunctionSample>();
      d.splits[s.sample_id] = split_from_string(j.at("split").get<std::string>());
      d.samples.push_back(std::move(s));
    } catch (const json::exception& e) {
      throw SchemaMismatch(samples_path.string() + " line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  if (content_hash(d.samples, d.splits) != d.manifest.content_hash) {
    throw IntegrityFailure(dir.string() + ": content_hash mismatch");
  }
  std::size_t counted = 0;
  for (const auto& [split, c] : d.manifest.counts) counted += c[0] + c[1];
  if (counted != d.samples.size() || d.manifest.total != d.samples.size()) {
    throw IntegrityFailure(dir.string() + ": manifest counts do not match samples.jsonl");
  }

  const auto report_path = dir / "curation_report.json";
  if (fs::exists(report_path)) d.report = json::parse(read_file(report_path)).get<CurationReport>();
  const auto negatives_path = dir / "hard_negatives.jsonl";
  if (fs::exists(negatives_path)) {
    for (const auto& line : split_lines(read_file(negatives_path))) {
      if (!trim(line).empty()) d.hard_negatives.push_back(json::parse(line).get<HardNegativePair>());
    }
  }
  return d;
}

namespace {

void fill_lines_from_diff(FunctionSample& s) {
  const auto hunks = diff_texts(*s.function_before, *s.function_after, 0);
  const auto before = split_lines(*s.function_before);
  const auto after = split_lines(*s.function_after);
  for (const auto& h : hunks) {
    const auto c = changed_lines(h);
    for (int n : c.removed_old_lines) {
      s.flaw_line_nos.push_back(n);
      s.flaw_lines.push_back(quote_line(before[n - 1]));
    }
    for (int n : c.added_new_lines) {
      s.patch_line_nos.push_back(n);
      s.patch_lines.push_back(quote_line(after[n - 1]));
    }
  }
}

std::vector<FunctionSample> import_bigvul(const fs::path& path, std::vector<ImportDiagnostic>& diag) {
  const auto records = csv::parse(sanitize_utf8(read_file(path)));
  if (records.empty()) return {};
  const auto& header = records.front().fields;
  const auto column = [&](const std::string& name, bool required) -> std::optional<std::size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      if (required) throw SchemaMismatch(path.string() + ": missing column '" + name + "'");
      return std::nullopt;
    }
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto c_before = *column("func_before", true);
  const auto c_after = column("func_after", false);
  const auto c_vul = *column("vul", true);
  const auto c_cwe = column("CWE ID", false);
  const auto c_cve = column("CVE ID", false);
  const auto c_project = column("project", false);
  const auto c_commit = column("commit_id", false);
  const auto source = path.stem().string();

  std::vector<FunctionSample> out;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& f = records[r].fields;
    const auto get = [&](std::optional<std::size_t> c) {
      return c && *c < f.size() ? f[*c] : std::string();
    };
    if (f.size() != header.size()) {
      diag.push_back({r, "expected " + std::to_string(header.size()) + " fields, got " +
                             std::to_string(f.size())});
      continue;
    }
    const auto vul = trim(f[c_vul]);
    if (vul != "0" && vul != "1") {
      diag.push_back({r, "vul must be 0 or 1, got '" + std::string(vul) + "'"});
      continue;
    }
    const auto before = f[c_before];
    const auto after = c_after ? f[*c_after] : std::string();
    if (before.empty()) {
      diag.push_back({r, "empty func_before"});
      continue;
    }
    FunctionSample base;
    base.cwe_id = get(c_cwe);
    if (base.cwe_id == "NVD-CWE-Other" || base.cwe_id == "NVD-CWE-noinfo") base.cwe_id.clear();
    base.cve_id = get(c_cve);
    base.project = get(c_project);
    base.commit_sha = get(c_commit);
    base.source = source;
    base.provenance = "import:bigvul_csv";

    if (vul == "0" || after.empty() || after == before) {
      if (vul == "1") {
        diag.push_back({r, "vulnerable row without a distinct func_after"});
        continue;
      }
      FunctionSample s = base;
      s.label = 0;
      s.function_after = after.empty() ? before : after;
      s.sample_id = make_sample_id(0, *s.function_after);
      out.push_back(std::move(s));
      continue;
    }
    FunctionSample v = base;
    v.label = 1;
    v.function_before = before;
    v.function_after = after;
    fill_lines_from_diff(v);
    v.sample_id = make_sample_id(1, before);
    v.pair_id = sha256_hex("pair\n" + source + "\n" + std::to_string(r) + "\n" + v.sample_id).substr(0, 32);
    FunctionSample s = base;
    s.label = 0;
    s.function_after = after;
    s.patch_line_nos = v.patch_line_nos;
    s.patch_lines = v.patch_lines;
    s.pair_id = v.pair_id;
    s.sample_id = make_sample_id(0, after);
    out.push_back(std::move(v));
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<FunctionSample> import_jsonl(const fs::path& path, std::vector<ImportDiagnostic>& diag) {
  std::vector<FunctionSample> out;
  const auto lines = split_lines(sanitize_utf8(read_file(path)));
  std::size_t row = 0;
  for (const auto& line : lines) {
    if (trim(line).empty()) continue;
    ++row;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      diag.push_back({row, std::string("invalid JSON: ") + e.what()});
      continue;
    }
    if (!j.is_object()) {
      diag.push_back({row, "row is not a JSON object"});
      continue;
    }
    if (!j.contains("label") || !j.at("label").is_number_integer()) {
      diag.push_back({row, "missing or non-integer label"});
      continue;
    }
    FunctionSample s;
    try {
      json filled = j;
      if (!filled.contains("sample_id")) filled["sample_id"] = "";
      s = filled.get<FunctionSample>();
    } catch (const json::exception& e) {
      diag.push_back({row, std::string("field type error: ") + e.what()});
      continue;
    }
    if (s.label != 0 && s.label != 1) {
      diag.push_back({row, "label must be 0 or 1"});
      continue;
    }
    if (s.sample_id.empty()) s.sample_id = make_sample_id(s.label, s.labeled_code());
    if (!j.contains("source")) s.source = path.stem().string();
    if (!j.contains("provenance")) s.provenance = "import:generic_jsonl";
    const auto problems = check_invariants(s);
    if (!problems.empty()) {
      diag.push_back({row, problems.front()});
      continue;
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

const std::vector<std::string>& import_adapters() {
  static const std::vector<std::string> names = {"bigvul_csv", "generic_jsonl"};
  return names;
}

std::vector<FunctionSample> import_external(const fs::path& path, const std::string& adapter,
                                            std::vector<ImportDiagnostic>* diagnostics) {
  std::vector<ImportDiagnostic> local;
  auto& diag = diagnostics ? *diagnostics : local;
  if (adapter == "bigvul_csv") return import_bigvul(path, diag);
  if (adapter == "generic_jsonl") return import_jsonl(path, diag);
  throw UnknownAdapter("unknown import adapter '" + adapter + "' (known: bigvul_csv, generic_jsonl)");
}

std::vector<CweFrequency> cwe_frequency(const std::vector<FunctionSample>& samples) {
  std::map<std::string, std::size_t> counts;
  std::size_t total = 0;
  for (const auto& s : samples) {
    if (s.label != 1 || s.cwe_id.empty()) continue;
    ++counts[s.cwe_id];
    ++total;
  }
  std::vector<CweFrequency> out;
  for (const auto& [id, count] : counts) {
    out.push_back({id, count, 100.0 * static_cast<double>(count) / static_cast<double>(total)});
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.count > b.count;
  });
  return out;
}

}  // namespace vulnforge
