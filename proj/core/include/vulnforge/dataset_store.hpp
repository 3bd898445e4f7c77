#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "vulnforge/curator.hpp"
#include "vulnforge/sample.hpp"

namespace vulnforge {

inline constexpr std::string_view kSchemaVersion = "vulnforge-dataset-v1";

struct SourceCount {
  std::string name;
  std::size_t count = 0;

  bool operator==(const SourceCount&) const = default;
};

struct DatasetManifest {
  std::string schema_version{kSchemaVersion};
  std::string created;  // ISO-8601 UTC
  std::string config_hash;
  // split name -> {label 0 count, label 1 count}
  std::map<std::string, std::array<std::size_t, 2>> counts;
  std::vector<SourceCount> sources;
  std::string content_hash;
  std::string digest_algorithm = "sha256";
  std::size_t total = 0;

  bool operator==(const DatasetManifest&) const = default;
};

void to_json(nlohmann::json& j, const DatasetManifest& manifest);
void from_json(const nlohmann::json& j, DatasetManifest& manifest);

struct Dataset {
  std::vector<FunctionSample> samples;
  SplitAssignment splits;
  DatasetManifest manifest;
  CurationReport report;
  std::vector<HardNegativePair> hard_negatives;
};

// Canonical JSON line of one sample with its split (keys sorted, UTF-8, no
// insignificant whitespace).
std::string canonical_record(const FunctionSample& sample, Split split);

// sha256 over canonical_record(s) + "\n" for the samples in the given order.
std::string content_hash(const std::vector<FunctionSample>& samples, const SplitAssignment& splits);

std::string config_hash(const CurationConfig& config);

// Sorts samples by sample_id (the stored order) and fills counts, sources
// and hashes. `created` defaults to the current time.
DatasetManifest make_manifest(std::vector<FunctionSample>& samples, const SplitAssignment& splits,
                              const CurationConfig& config, std::string created = {});

// Column order of samples.csv.
const std::vector<std::string>& csv_columns();

std::string samples_to_csv(const std::vector<FunctionSample>& samples, const SplitAssignment& splits);

// Reads the CSV columns back. Fields stored only in samples.jsonl keep their
// defaults. Throws SchemaMismatch when the header differs from csv_columns().
std::pair<std::vector<FunctionSample>, SplitAssignment> samples_from_csv(std::string_view text);

// Writes manifest.json, samples.jsonl, samples.csv, curation_report.json and
// hard_negatives.jsonl under the directory lock. Throws InvalidArgument when a
// sample violates its invariants or lacks a split, DatasetLocked when another
// writer holds the lock.
void write_dataset(const Dataset& dataset, const std::filesystem::path& dir);

// Throws SchemaMismatch, IntegrityFailure or IoError.
Dataset read_dataset(const std::filesystem::path& dir);

// Exclusive advisory lock on <dir>/<name> for the lifetime of the object.
class DatasetLock {
 public:
  explicit DatasetLock(const std::filesystem::path& dir, const std::string& name = ".lock");
  ~DatasetLock();
  DatasetLock(const DatasetLock&) = delete;
  DatasetLock& operator=(const DatasetLock&) = delete;

 private:
  int fd_ = -1;
};

struct ImportDiagnostic {
  std::size_t row = 0;  // 1-based data row
  std::string message;
};

// Adapters: "bigvul_csv", "generic_jsonl". Throws UnknownAdapter.
std::vector<FunctionSample> import_external(const std::filesystem::path& path,
                                            const std::string& adapter,
                                            std::vector<ImportDiagnostic>* diagnostics = nullptr);

const std::vector<std::string>& import_adapters();

struct CweFrequency {
  std::string cwe_id;
  std::size_t count = 0;
  double percentage = 0.0;

  bool operator==(const CweFrequency&) const = default;
};

// Label-1 samples per cwe_id; percentage of label-1 samples with a non-empty
// cwe_id. Sorted by count descending, then cwe_id ascending.
std::vector<CweFrequency> cwe_frequency(const std::vector<FunctionSample>& samples);

}  // namespace vulnforge
