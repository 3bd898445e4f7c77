#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vulnforge {

struct CweInfo {
  std::string cwe_id;
  std::string title;
  std::string weakness_type;  // abstraction level as published (Base, Variant, Class, ...)
  std::string description;

  bool operator==(const CweInfo&) const = default;
};

// Immutable id -> CweInfo index. Safe for concurrent reads.
class CweCatalog {
 public:
  CweCatalog() = default;
  explicit CweCatalog(std::map<std::string, CweInfo> entries) : entries_(std::move(entries)) {}

  std::size_t size() const noexcept { return entries_.size(); }

  // Absent for unknown ids; throws InvalidCweId when the id is not CWE-<digits>.
  std::optional<CweInfo> lookup(const std::string& cwe_id) const;

  // Catalog CSV, entries ordered by numeric id.
  std::string to_csv() const;

  const std::map<std::string, CweInfo>& entries() const noexcept { return entries_; }

 private:
  std::map<std::string, CweInfo> entries_;
};

// UTF-8 CSV with header `cwe_id,title,type,description`.
// Throws CatalogMissing or CatalogMalformed (with the offending line or id).
CweCatalog load_catalog(const std::filesystem::path& path);
CweCatalog parse_catalog(std::string_view text, const std::string& origin = "<memory>");

// Converts MITRE's published weakness CSV (CWE-ID, Name, Weakness Abstraction,
// Description, ...) into a catalog. Accepts the zipped download as-is.
CweCatalog catalog_from_mitre_export(std::string_view payload);

// Returns the first file of a zip archive. Throws CatalogMalformed.
std::string unzip_first_entry(std::string_view archive);

}  // namespace vulnforge
