#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace vulnforge {

// Splits on '\n'. A trailing newline does not produce an empty final line,
// and "\r\n" endings keep their '\r' (sources are compared as written).
std::vector<std::string> split_lines(std::string_view text);

// Inverse of split_lines for text that ended with a newline.
std::string join_lines(const std::vector<std::string>& lines, bool trailing_newline = true);

std::size_t count_lines(std::string_view text);

std::string_view trim(std::string_view text);

// Quote form of a single source line used for flaw/patch code columns: outer
// whitespace removed, then one trailing block-opening brace dropped.
//   "    if(strcmp(input, \"admin\")) {"  ->  "if(strcmp(input, \"admin\"))"
std::string quote_line(std::string_view line);

// Replaces invalid UTF-8 sequences with U+FFFD. Returns the number of
// replacements through `replaced` when non-null.
std::string sanitize_utf8(std::string_view bytes, std::size_t* replaced = nullptr);

std::string to_lower(std::string_view text);

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file and renames it over `path`, so readers see
// either the old or the new content. Parent directories are created.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Current UTC time as ISO-8601 with a trailing Z, second precision.
std::string utc_now_iso8601();

}  // namespace vulnforge
