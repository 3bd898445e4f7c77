#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace vulnforge {

// One labeled function. A vulnerable sample (label 1) carries the function as
// it was before the fix plus, when the fix kept the function, the patched
// text; its secure twin (label 0) carries only the patched function. Both
// share a pair_id.
struct FunctionSample {
  std::string sample_id;
  std::optional<std::string> function_before;
  std::optional<std::string> function_after;
  int label = 0;  // 1 = vulnerable, 0 = secure
  std::string cwe_id;
  std::string cwe_title;
  std::string cwe_type;
  std::string cwe_description;
  std::vector<std::string> extra_cwe_ids;
  std::vector<int> flaw_line_nos;  // 1-based into function_before
  std::vector<std::string> flaw_lines;
  std::vector<int> patch_line_nos;  // 1-based into function_after
  std::vector<std::string> patch_lines;
  std::string project;  // owner/repo
  std::string commit_sha;
  std::string cve_id;
  std::optional<std::string> pair_id;
  std::string file_path;
  std::string function_name;
  std::string published;  // YYYY-MM-DD of the advisory, may be empty
  std::string source = "vulnforge";
  std::string provenance = "fix_commit";

  // The text the label speaks about: function_before for label 1,
  // function_after for label 0.
  const std::string& labeled_code() const;

  bool operator==(const FunctionSample&) const = default;
};

// Deterministic id from label and labeled code.
std::string make_sample_id(int label, const std::string& labeled_code);

// Empty when all invariants hold, otherwise one message per violation.
std::vector<std::string> check_invariants(const FunctionSample& sample);

void to_json(nlohmann::json& j, const FunctionSample& sample);
void from_json(const nlohmann::json& j, FunctionSample& sample);

}  // namespace vulnforge
