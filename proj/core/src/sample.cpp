#include "vulnforge/sample.hpp"

#include <nlohmann/json.hpp>

#include "vulnforge/errors.hpp"
#include "vulnforge/hashing.hpp"
#include "vulnforge/text.hpp"

namespace vulnforge {

namespace {

const std::string kEmpty;

void check_quotes(const std::optional<std::string>& code, const std::vector<int>& numbers,
                  const std::vector<std::string>& quotes, const char* side,
                  std::vector<std::string>& problems) {
  if (numbers.size() != quotes.size()) {
    problems.push_back(std::string(side) + ": line number and quote counts differ");
    return;
  }
  if (numbers.empty()) return;
  if (!code) {
    problems.push_back(std::string(side) + ": line numbers without function text");
    return;
  }
  const auto lines = split_lines(*code);
  for (std::size_t i = 0; i < numbers.size(); ++i) {
    const int n = numbers[i];
    if (n < 1 || static_cast<std::size_t>(n) > lines.size()) {
      problems.push_back(std::string(side) + ": line " + std::to_string(n) + " out of range");
    } else if (quote_line(lines[n - 1]) != quotes[i]) {
      problems.push_back(std::string(side) + ": quote for line " + std::to_string(n) +
                         " does not match the function text");
    }
  }
}

}  // namespace

const std::string& FunctionSample::labeled_code() const {
  const auto& code = label == 1 ? function_before : function_after;
  return code ? *code : kEmpty;
}

std::string make_sample_id(int label, const std::string& labeled_code) {
  return sha256_hex(std::to_string(label) + "\n" + labeled_code).substr(0, 32);
}

std::vector<std::string> check_invariants(const FunctionSample& s) {
  std::vector<std::string> problems;
  if (s.label != 0 && s.label != 1) problems.push_back("label must be 0 or 1");
  if (s.label == 1 && !s.function_before) problems.push_back("label 1 without function_before");
  if (s.label == 0 && !s.function_after) problems.push_back("label 0 without function_after");
  check_quotes(s.function_before, s.flaw_line_nos, s.flaw_lines, "flaw", problems);
  check_quotes(s.function_after, s.patch_line_nos, s.patch_lines, "patch", problems);
  if (s.label == 0 || s.label == 1) {
    if (s.sample_id != make_sample_id(s.label, s.labeled_code())) {
      problems.push_back("sample_id does not match label and code");
    }
  }
  return problems;
}

void to_json(nlohmann::json& j, const FunctionSample& s) {
  const auto opt = [](const std::optional<std::string>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  j = nlohmann::json{{"sample_id", s.sample_id},
                     {"function_before", opt(s.function_before)},
                     {"function_after", opt(s.function_after)},
                     {"label", s.label},
                     {"cwe_id", s.cwe_id},
                     {"cwe_title", s.cwe_title},
                     {"cwe_type", s.cwe_type},
                     {"cwe_description", s.cwe_description},
                     {"extra_cwe_ids", s.extra_cwe_ids},
                     {"flaw_line_nos", s.flaw_line_nos},
                     {"flaw_lines", s.flaw_lines},
                     {"patch_line_nos", s.patch_line_nos},
                     {"patch_lines", s.patch_lines},
                     {"project", s.project},
                     {"commit_sha", s.commit_sha},
                     {"cve_id", s.cve_id},
                     {"pair_id", opt(s.pair_id)},
                     {"file_path", s.file_path},
                     {"function_name", s.function_name},
                     {"published", s.published},
                     {"source", s.source},
                     {"provenance", s.provenance}};
}

void from_json(const nlohmann::json& j, FunctionSample& s) {
  const auto opt = [&](const char* key) -> std::optional<std::string> {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<std::string>();
  };
  s.sample_id = j.at("sample_id").get<std::string>();
  s.function_before = opt("function_before");
  s.function_after = opt("function_after");
  s.label = j.at("label").get<int>();
  s.cwe_id = j.value("cwe_id", "");
  s.cwe_title = j.value("cwe_title", "");
  s.cwe_type = j.value("cwe_type", "");
  s.cwe_description = j.value("cwe_description", "");
  s.extra_cwe_ids = j.value("extra_cwe_ids", std::vector<std::string>{});
  s.flaw_line_nos = j.value("flaw_line_nos", std::vector<int>{});
  s.flaw_lines = j.value("flaw_lines", std::vector<std::string>{});
  s.patch_line_nos = j.value("patch_line_nos", std::vector<int>{});
  s.patch_lines = j.value("patch_lines", std::vector<std::string>{});
  s.project = j.value("project", "");
  s.commit_sha = j.value("commit_sha", "");
  s.cve_id = j.value("cve_id", "");
  s.pair_id = opt("pair_id");
  s.file_path = j.value("file_path", "");
  s.function_name = j.value("function_name", "");
  s.published = j.value("published", "");
  s.source = j.value("source", "vulnforge");
  s.provenance = j.value("provenance", "fix_commit");
}

}  // namespace vulnforge
