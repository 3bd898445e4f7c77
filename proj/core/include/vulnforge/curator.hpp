#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "vulnforge/sample.hpp"

namespace vulnforge {

enum class Normalization { exact, strip_ws, strip_ws_comments };
enum class SplitMode { random, by_project };
enum class Split { train, validation, test };

std::string to_string(Normalization mode);
std::string to_string(SplitMode mode);
std::string to_string(Split split);
Normalization normalization_from_string(const std::string& text);
SplitMode split_mode_from_string(const std::string& text);
Split split_from_string(const std::string& text);

struct CurationConfig {
  Normalization dedup_normalization = Normalization::strip_ws;
  bool drop_whitespace_only_fixes = true;
  double hard_negative_max_distance = 0.15;
  double balance_tolerance = 1.05;
  std::array<double, 3> split_ratios{0.8, 0.1, 0.1};
  SplitMode split_mode = SplitMode::random;
  std::uint64_t seed = 42;

  // Throws InvalidArgument.
  void validate() const;

  bool operator==(const CurationConfig&) const = default;
};

void to_json(nlohmann::json& j, const CurationConfig& config);
void from_json(const nlohmann::json& j, CurationConfig& config);

struct CurationReport {
  std::size_t input = 0;
  std::size_t exact_dups = 0;
  std::size_t near_dups = 0;
  std::size_t conflicts = 0;
  std::size_t whitespace_only_fixes = 0;
  std::size_t unlinked_twins = 0;
  std::size_t balance_removed = 0;
  std::size_t balance_shortfall = 0;  // majority samples kept only because they are paired
  std::size_t hard_negative_pairs = 0;
  std::size_t output = 0;

  bool operator==(const CurationReport&) const = default;
};

void to_json(nlohmann::json& j, const CurationReport& report);
void from_json(const nlohmann::json& j, CurationReport& report);

std::string normalize_code(std::string_view code, Normalization mode);

// Keeps one representative per (normalized labeled code, label), earliest
// published first and input order on ties. Normalized code seen under both
// labels is dropped on both sides, unless the clash is a pair_id-linked twin
// whose raw texts differ; then the twin members represent their groups.
std::vector<FunctionSample> deduplicate(const std::vector<FunctionSample>& samples,
                                        const CurationConfig& config,
                                        CurationReport* report = nullptr);

// Drops every member of a pair whose vulnerable and patched code are equal
// after whitespace and comment normalization.
std::vector<FunctionSample> drop_trivial_fixes(const std::vector<FunctionSample>& samples,
                                               CurationReport* report = nullptr);

// Clears pair_id on samples whose partner is gone.
std::vector<FunctionSample> unlink_orphans(const std::vector<FunctionSample>& samples,
                                           CurationReport* report = nullptr);

struct HardNegativePair {
  std::string vulnerable_id;
  std::string secure_id;
  double distance = 0.0;
  bool twin = false;

  bool operator==(const HardNegativePair&) const = default;
};

void to_json(nlohmann::json& j, const HardNegativePair& pair);
void from_json(const nlohmann::json& j, HardNegativePair& pair);

// Levenshtein distance over token sequences divided by the longer length;
// 0 for two empty sequences.
double normalized_edit_distance(const std::vector<std::string>& a,
                                const std::vector<std::string>& b);

// Ordered by vulnerable sample, then secure sample, in input order.
std::vector<HardNegativePair> mine_hard_negatives(const std::vector<FunctionSample>& samples,
                                                  const CurationConfig& config);

// Subsamples the majority class down to floor(minority * tolerance). Members
// of hard-negative pairs are never removed, so the target can be missed; the
// gap is reported as balance_shortfall. Input order is preserved.
std::vector<FunctionSample> balance_classes(const std::vector<FunctionSample>& samples,
                                            const CurationConfig& config,
                                            const std::vector<HardNegativePair>& hard_negatives,
                                            CurationReport* report = nullptr);

using SplitAssignment = std::map<std::string, Split>;

// (train, validation, test) target sizes for n samples.
std::array<std::size_t, 3> split_targets(std::size_t n, const std::array<double, 3>& ratios);

SplitAssignment make_splits(const std::vector<FunctionSample>& samples,
                            const CurationConfig& config);

struct CurationResult {
  std::vector<FunctionSample> samples;
  SplitAssignment splits;
  std::vector<HardNegativePair> hard_negatives;
  CurationReport report;
};

// deduplicate, drop_trivial_fixes (when enabled), unlink_orphans,
// mine_hard_negatives, balance_classes, make_splits.
CurationResult curate(const std::vector<FunctionSample>& samples, const CurationConfig& config);

}  // namespace vulnforge
