#include "vulnforge/csv.hpp"

#include "vulnforge/errors.hpp"

namespace vulnforge::csv {

std::vector<Record> parse(std::string_view text) {
  std::vector<Record> records;
  Record current;
  std::string field;
  std::size_t line = 1;
  std::size_t i = 0;
  bool record_started = false;

  const auto end_field = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
  };
  const auto end_record = [&] {
    end_field();
    records.push_back(std::move(current));
    current = Record{};
    record_started = false;
  };

  while (i < text.size()) {
    if (!record_started) {
      current.line = line;
      record_started = true;
    }
    const char c = text[i];
    if (c == '"' && field.empty()) {
      const std::size_t quote_line = line;
      ++i;
      for (;;) {
        if (i >= text.size()) {
          throw InvalidArgument("unterminated quoted field starting on line " +
                                std::to_string(quote_line));
        }
        if (text[i] == '"') {
          if (i + 1 < text.size() && text[i + 1] == '"') {
            field.push_back('"');
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        if (text[i] == '\n') ++line;
        field.push_back(text[i++]);
      }
      if (i < text.size() && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
        throw InvalidArgument("unexpected character after closing quote on line " +
                              std::to_string(line));
      }
      // An empty quoted field must still count as a field.
      if (i >= text.size()) break;
      continue;
    }
    if (c == ',') {
      end_field();
      ++i;
    } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
      end_record();
      i += 2;
      ++line;
    } else if (c == '\n') {
      end_record();
      ++i;
      ++line;
    } else {
      field.push_back(c);
      ++i;
    }
  }
  if (record_started) end_record();
  return records;
}

std::string escape_field(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out;
  out.reserve(field.size() + 2);
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_row(const Row& row) {
  std::string out;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out.push_back(',');
    out += escape_field(row[i]);
  }
  out.push_back('\n');
  return out;
}

}  // namespace vulnforge::csv
