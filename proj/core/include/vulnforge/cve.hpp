#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "vulnforge/net.hpp"

namespace vulnforge {

enum class SeveritySource { v3, v2, absent };

std::string to_string(SeveritySource source);
SeveritySource severity_source_from_string(const std::string& text);

struct CveRecord {
  std::string cve_id;
  std::string description;
  std::optional<double> severity;
  SeveritySource severity_source = SeveritySource::absent;
  std::vector<std::string> cwe_ids;  // as published; first is primary
  std::vector<std::string> reference_urls;
  std::string published;  // UTC date, YYYY-MM-DD

  bool operator==(const CveRecord&) const = default;
};

bool is_valid_cve_id(const std::string& id);
bool is_valid_cwe_id(const std::string& id);

// Throws MalformedResponse when an invariant does not hold.
void validate(const CveRecord& record);

void to_json(nlohmann::json& j, const CveRecord& record);
void from_json(const nlohmann::json& j, CveRecord& record);

// Newline-delimited JSON, one record per line.
std::string to_ndjson(const std::vector<CveRecord>& records);
std::vector<CveRecord> cves_from_ndjson(const std::string& text);

struct DateRange {
  std::string start;  // YYYY-MM-DD
  std::string end;
};

struct CveQueryOptions {
  std::optional<DateRange> date_range;
  std::optional<std::string> api_token;  // sent as the apiKey header
  std::string endpoint = "https://services.nvd.nist.gov/rest/json/cves/2.0";
  int page_size = 2000;
};

// Builds the request URL for one result page.
std::string cve_query_url(const std::string& keyword, int start_index,
                          const CveQueryOptions& options);

// Parses one page of the NVD 2.0 response shape. Returns the records and the
// advertised total result count. Throws MalformedResponse.
std::pair<std::vector<CveRecord>, int> parse_cve_page(const std::string& payload);

// All advisories matching any keyword, deduplicated by cve_id in first-seen
// order. Every response goes through the fetcher's cache under
// cve/<sha256(url)>.json.
std::vector<CveRecord> query_cves(const std::vector<std::string>& keywords, Fetcher& fetcher,
                                  const CveQueryOptions& options = {});

// Keeps records whose severity is strictly greater than threshold; records
// without a score are dropped. Order preserved.
std::vector<CveRecord> filter_by_severity(const std::vector<CveRecord>& records,
                                          double threshold);

}  // namespace vulnforge
