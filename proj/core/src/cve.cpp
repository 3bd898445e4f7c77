#include "vulnforge/cve.hpp"

#include <nlohmann/json.hpp>
#include <regex>
#include <unordered_set>

#include "vulnforge/errors.hpp"
#include "vulnforge/hashing.hpp"
#include "vulnforge/text.hpp"

namespace vulnforge {

namespace {

std::string percent_encode(const std::string& text) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : text) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xf]);
    }
  }
  return out;
}

// First base score found among the metric arrays of one family.
std::optional<double> base_score(const nlohmann::json& metrics,
                                 std::initializer_list<const char*> keys) {
  for (const char* key : keys) {
    const auto it = metrics.find(key);
    if (it == metrics.end() || !it->is_array()) continue;
    // Prefer the primary (NVD) assessment when several sources scored it.
    const nlohmann::json* chosen = nullptr;
    for (const auto& m : *it) {
      if (!chosen) chosen = &m;
      if (m.value("type", "") == "Primary") {
        chosen = &m;
        break;
      }
    }
    if (chosen && chosen->contains("cvssData")) {
      const auto& data = chosen->at("cvssData");
      if (data.contains("baseScore") && data.at("baseScore").is_number()) {
        return data.at("baseScore").get<double>();
      }
    }
  }
  return std::nullopt;
}

CveRecord parse_vulnerability(const nlohmann::json& item) {
  const auto& cve = item.at("cve");
  CveRecord record;
  record.cve_id = cve.at("id").get<std::string>();
  for (const auto& d : cve.value("descriptions", nlohmann::json::array())) {
    if (d.value("lang", "") == "en") {
      record.description = d.value("value", "");
      break;
    }
  }
  const auto metrics = cve.value("metrics", nlohmann::json::object());
  if (auto v3 = base_score(metrics, {"cvssMetricV31", "cvssMetricV30"})) {
    record.severity = v3;
    record.severity_source = SeveritySource::v3;
  } else if (auto v2 = base_score(metrics, {"cvssMetricV2"})) {
    record.severity = v2;
    record.severity_source = SeveritySource::v2;
  }
  for (const auto& weakness : cve.value("weaknesses", nlohmann::json::array())) {
    for (const auto& d : weakness.value("description", nlohmann::json::array())) {
      const auto value = d.value("value", "");
      if (is_valid_cwe_id(value) &&
          std::find(record.cwe_ids.begin(), record.cwe_ids.end(), value) == record.cwe_ids.end()) {
        record.cwe_ids.push_back(value);
      }
    }
  }
  for (const auto& ref : cve.value("references", nlohmann::json::array())) {
    record.reference_urls.push_back(ref.at("url").get<std::string>());
  }
  record.published = cve.value("published", "").substr(0, 10);
  return record;
}

}  // namespace

std::string to_string(SeveritySource source) {
  switch (source) {
    case SeveritySource::v3:
      return "v3";
    case SeveritySource::v2:
      return "v2";
    case SeveritySource::absent:
      break;
  }
  return "absent";
}

SeveritySource severity_source_from_string(const std::string& text) {
  if (text == "v3") return SeveritySource::v3;
  if (text == "v2") return SeveritySource::v2;
  if (text == "absent") return SeveritySource::absent;
  throw InvalidArgument("unknown severity source '" + text + "'");
}

bool is_valid_cve_id(const std::string& id) {
  static const std::regex pattern(R"(CVE-\d{4}-\d{4,})");
  return std::regex_match(id, pattern);
}

bool is_valid_cwe_id(const std::string& id) {
  static const std::regex pattern(R"(CWE-\d+)");
  return std::regex_match(id, pattern);
}

void validate(const CveRecord& record) {
  if (!is_valid_cve_id(record.cve_id)) {
    throw MalformedResponse("invalid CVE id '" + record.cve_id + "'");
  }
  if (record.severity && (*record.severity < 0.0 || *record.severity > 10.0)) {
    throw MalformedResponse(record.cve_id + ": severity out of range");
  }
  if (record.severity.has_value() == (record.severity_source == SeveritySource::absent)) {
    throw MalformedResponse(record.cve_id + ": severity and severity_source disagree");
  }
  for (const auto& cwe : record.cwe_ids) {
    if (!is_valid_cwe_id(cwe)) throw MalformedResponse(record.cve_id + ": bad CWE id " + cwe);
  }
}

void to_json(nlohmann::json& j, const CveRecord& record) {
  j = nlohmann::json{{"cve_id", record.cve_id},
                     {"description", record.description},
                     {"severity", nullptr},
                     {"severity_source", to_string(record.severity_source)},
                     {"cwe_ids", record.cwe_ids},
                     {"reference_urls", record.reference_urls},
                     {"published", record.published}};
  if (record.severity) j["severity"] = *record.severity;
}

void from_json(const nlohmann::json& j, CveRecord& record) {
  record.cve_id = j.at("cve_id").get<std::string>();
  record.description = j.value("description", "");
  if (j.contains("severity") && !j.at("severity").is_null()) {
    record.severity = j.at("severity").get<double>();
  } else {
    record.severity.reset();
  }
  record.severity_source = severity_source_from_string(j.value("severity_source", "absent"));
  record.cwe_ids = j.value("cwe_ids", std::vector<std::string>{});
  record.reference_urls = j.value("reference_urls", std::vector<std::string>{});
  record.published = j.value("published", "");
}

std::string to_ndjson(const std::vector<CveRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += nlohmann::json(r).dump();
    out.push_back('\n');
  }
  return out;
}

std::vector<CveRecord> cves_from_ndjson(const std::string& text) {
  std::vector<CveRecord> records;
  std::size_t line_no = 0;
  for (const auto& line : split_lines(text)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      records.push_back(nlohmann::json::parse(line).get<CveRecord>());
    } catch (const nlohmann::json::exception& e) {
      throw MalformedResponse("CVE record line " + std::to_string(line_no) + ": " + e.what());
    }
    validate(records.back());
  }
  return records;
}

std::string cve_query_url(const std::string& keyword, int start_index,
                          const CveQueryOptions& options) {
  std::string url = options.endpoint + "?keywordSearch=" + percent_encode(keyword) +
                    "&resultsPerPage=" + std::to_string(options.page_size) +
                    "&startIndex=" + std::to_string(start_index);
  if (options.date_range) {
    url += "&pubStartDate=" + options.date_range->start + "T00:00:00.000";
    url += "&pubEndDate=" + options.date_range->end + "T23:59:59.999";
  }
  return url;
}

std::pair<std::vector<CveRecord>, int> parse_cve_page(const std::string& payload) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(payload);
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedResponse(std::string("response is not JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("vulnerabilities") ||
      !doc.at("vulnerabilities").is_array() || !doc.contains("totalResults") ||
      !doc.at("totalResults").is_number_integer()) {
    throw MalformedResponse("response lacks vulnerabilities[] or totalResults");
  }
  std::vector<CveRecord> records;
  for (const auto& item : doc.at("vulnerabilities")) {
    try {
      records.push_back(parse_vulnerability(item));
    } catch (const nlohmann::json::exception& e) {
      throw MalformedResponse(std::string("bad vulnerability entry: ") + e.what());
    }
    validate(records.back());
  }
  return {std::move(records), doc.at("totalResults").get<int>()};
}

std::vector<CveRecord> query_cves(const std::vector<std::string>& keywords, Fetcher& fetcher,
                                  const CveQueryOptions& options) {
  if (keywords.empty()) throw InvalidArgument("query_cves: keyword list is empty");
  for (const auto& k : keywords) {
    if (trim(k).empty()) throw InvalidArgument("query_cves: empty keyword");
  }
  if (options.page_size <= 0) throw InvalidArgument("query_cves: page_size must be positive");

  std::vector<std::pair<std::string, std::string>> headers;
  if (options.api_token && !options.api_token->empty()) {
    headers.emplace_back("apiKey", *options.api_token);
  }

  std::vector<CveRecord> out;
  std::unordered_set<std::string> seen;
  for (const auto& raw_keyword : keywords) {
    const std::string keyword(trim(raw_keyword));
    int start = 0;
    for (;;) {
      const auto url = cve_query_url(keyword, start, options);
      const auto key = std::filesystem::path("cve") / (sha256_hex(url) + ".json");
      const auto response = fetcher.get(url, key, headers);
      if (response.status != 200) {
        throw NetworkUnavailable(url + " returned HTTP " + std::to_string(response.status));
      }
      std::pair<std::vector<CveRecord>, int> page;
      try {
        page = parse_cve_page(response.body);
      } catch (const MalformedResponse& e) {
        throw MalformedResponse(std::string(e.what()) + " (payload kept at " +
                                (fetcher.cache().root() / key).string() + ")");
      }
      for (auto& record : page.first) {
        if (seen.insert(record.cve_id).second) out.push_back(std::move(record));
      }
      start += options.page_size;
      if (page.first.empty() || start >= page.second) break;
    }
  }
  return out;
}

std::vector<CveRecord> filter_by_severity(const std::vector<CveRecord>& records,
                                          double threshold) {
  if (threshold < 0.0 || threshold > 10.0) {
    throw InvalidArgument("severity threshold must lie in [0, 10]");
  }
  std::vector<CveRecord> out;
  for (const auto& r : records) {
    if (r.severity && *r.severity > threshold) out.push_back(r);
  }
  return out;
}

}  // namespace vulnforge
