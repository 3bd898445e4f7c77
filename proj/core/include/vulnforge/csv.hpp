#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace vulnforge::csv {

using Row = std::vector<std::string>;

struct Record {
  Row fields;
  std::size_t line = 0;  // 1-based physical line where the record starts
};

// RFC-4180 reader. Quoted fields may hold commas, doubled quotes and raw
// newlines. Accepts LF or CRLF record separators. Throws InvalidArgument on an
// unterminated quote or stray characters after a closing quote.
std::vector<Record> parse(std::string_view text);

// Quotes a field only when it contains a comma, quote, CR or LF.
std::string escape_field(std::string_view field);

// One record terminated by LF.
std::string format_row(const Row& row);

}  // namespace vulnforge::csv
