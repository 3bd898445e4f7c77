#include "vulnforge/cwe.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstring>
#include <unordered_map>

#include "vulnforge/csv.hpp"
#include "vulnforge/cve.hpp"
#include "vulnforge/errors.hpp"
#include "vulnforge/text.hpp"

namespace vulnforge {

namespace {

const csv::Row kHeader = {"cwe_id", "title", "type", "description"};

unsigned long cwe_number(const std::string& id) { return std::stoul(id.substr(4)); }

std::uint32_t le32(std::string_view bytes, std::size_t at) {
  if (at + 4 > bytes.size()) throw CatalogMalformed("zip: truncated archive");
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(bytes[at + i]);
  return v;
}

std::uint16_t le16(std::string_view bytes, std::size_t at) {
  if (at + 2 > bytes.size()) throw CatalogMalformed("zip: truncated archive");
  return static_cast<std::uint16_t>(static_cast<unsigned char>(bytes[at]) |
                                    (static_cast<unsigned char>(bytes[at + 1]) << 8));
}

}  // namespace

std::optional<CweInfo> CweCatalog::lookup(const std::string& cwe_id) const {
  if (!is_valid_cwe_id(cwe_id)) throw InvalidCweId("invalid CWE id '" + cwe_id + "'");
  const auto it = entries_.find(cwe_id);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::string CweCatalog::to_csv() const {
  std::vector<const CweInfo*> ordered;
  for (const auto& [id, info] : entries_) ordered.push_back(&info);
  std::sort(ordered.begin(), ordered.end(), [](const CweInfo* a, const CweInfo* b) {
    return cwe_number(a->cwe_id) < cwe_number(b->cwe_id);
  });
  std::string out = csv::format_row(kHeader);
  for (const auto* info : ordered) {
    out += csv::format_row({info->cwe_id, info->title, info->weakness_type, info->description});
  }
  return out;
}

CweCatalog parse_catalog(std::string_view text, const std::string& origin) {
  std::vector<csv::Record> records;
  try {
    records = csv::parse(text);
  } catch (const InvalidArgument& e) {
    throw CatalogMalformed(origin + ": " + e.what());
  }
  if (records.empty()) throw CatalogMalformed(origin + ": empty catalog");
  if (records.front().fields != kHeader) {
    throw CatalogMalformed(origin + ": line 1: expected header cwe_id,title,type,description");
  }
  if (records.size() == 1) throw CatalogMalformed(origin + ": catalog has no entries");
  std::map<std::string, CweInfo> entries;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& rec = records[i];
    const auto where = origin + ": line " + std::to_string(rec.line) + " (entry " +
                       std::to_string(i) + ")";
    if (rec.fields.size() != kHeader.size()) {
      throw CatalogMalformed(where + ": expected 4 fields, got " +
                             std::to_string(rec.fields.size()));
    }
    CweInfo info{rec.fields[0], rec.fields[1], rec.fields[2], rec.fields[3]};
    if (!is_valid_cwe_id(info.cwe_id)) throw CatalogMalformed(where + ": bad id '" + info.cwe_id + "'");
    if (trim(info.title).empty()) throw CatalogMalformed(where + ": empty title for " + info.cwe_id);
    const auto id = info.cwe_id;
    if (!entries.emplace(id, std::move(info)).second) {
      throw CatalogMalformed(where + ": duplicate cwe_id " + id);
    }
  }
  return CweCatalog(std::move(entries));
}

CweCatalog load_catalog(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw CatalogMissing("CWE catalog not found: " + path.string());
  }
  return parse_catalog(read_file(path), path.string());
}

std::string unzip_first_entry(std::string_view archive) {
  // Locate the end-of-central-directory record and read the first entry
  // through the central directory, which always carries the real sizes.
  const std::size_t min_eocd = 22;
  if (archive.size() < min_eocd) throw CatalogMalformed("zip: archive too small");
  std::size_t eocd = std::string_view::npos;
  for (std::size_t i = archive.size() - min_eocd + 1; i-- > 0;) {
    if (le32(archive, i) == 0x06054b50) {
      eocd = i;
      break;
    }
  }
  if (eocd == std::string_view::npos) throw CatalogMalformed("zip: no central directory");
  const std::size_t cd = le32(archive, eocd + 16);
  if (le32(archive, cd) != 0x02014b50) throw CatalogMalformed("zip: bad central directory");
  const auto method = le16(archive, cd + 10);
  const std::size_t compressed = le32(archive, cd + 20);
  const std::size_t uncompressed = le32(archive, cd + 24);
  const std::size_t local = le32(archive, cd + 42);
  if (le32(archive, local) != 0x04034b50) throw CatalogMalformed("zip: bad local header");
  const std::size_t data = local + 30 + le16(archive, local + 26) + le16(archive, local + 28);
  if (data + compressed > archive.size()) throw CatalogMalformed("zip: truncated entry");
  const auto payload = archive.substr(data, compressed);
  if (method == 0) return std::string(payload);
  if (method != 8) throw CatalogMalformed("zip: unsupported compression method");

  std::string out(uncompressed, '\0');
  z_stream zs{};
  if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw CatalogMalformed("zip: inflateInit failed");
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(payload.data()));
  zs.avail_in = static_cast<uInt>(payload.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&zs, Z_FINISH);
  inflateEnd(&zs);
  if (rc != Z_STREAM_END) throw CatalogMalformed("zip: inflate failed");
  out.resize(zs.total_out);
  return out;
}

CweCatalog catalog_from_mitre_export(std::string_view payload) {
  std::string text = payload.substr(0, 2) == "PK" ? unzip_first_entry(payload) : std::string(payload);
  std::vector<csv::Record> records;
  try {
    records = csv::parse(text);
  } catch (const InvalidArgument& e) {
    throw CatalogMalformed(std::string("MITRE export: ") + e.what());
  }
  if (records.empty()) throw CatalogMalformed("MITRE export: empty");
  std::unordered_map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < records.front().fields.size(); ++i) {
    column[std::string(trim(records.front().fields[i]))] = i;
  }
  for (const char* required : {"CWE-ID", "Name", "Weakness Abstraction", "Description"}) {
    if (!column.count(required)) {
      throw CatalogMalformed(std::string("MITRE export: missing column ") + required);
    }
  }
  std::map<std::string, CweInfo> entries;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& f = records[i].fields;
    if (f.size() < column.size()) continue;
    const auto raw_id = std::string(trim(f[column["CWE-ID"]]));
    if (raw_id.empty()) continue;
    CweInfo info{raw_id.rfind("CWE-", 0) == 0 ? raw_id : "CWE-" + raw_id,
                 f[column["Name"]], f[column["Weakness Abstraction"]], f[column["Description"]]};
    if (!is_valid_cwe_id(info.cwe_id) || trim(info.title).empty()) continue;
    entries.emplace(info.cwe_id, std::move(info));
  }
  if (entries.empty()) throw CatalogMalformed("MITRE export: no usable entries");
  return CweCatalog(std::move(entries));
}

}  // namespace vulnforge
