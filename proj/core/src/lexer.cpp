#include "vulnforge/lexer.hpp"

#include <array>
#include <cctype>

namespace vulnforge {

namespace {

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$' ||
         static_cast<unsigned char>(c) >= 0x80;
}

bool is_ident_char(char c) {
  return is_ident_start(c) || std::isdigit(static_cast<unsigned char>(c));
}

constexpr std::array<std::string_view, 24> kLongPuncts = {
    "<<=", ">>=", "...", "->*", "<=>", "::", "->", "++", "--", "<<", ">>", "<=",
    ">=",  "==",  "!=",  "&&",  "||",  "+=", "-=", "*=", "/=", "%=", "&=", "|="};

constexpr std::array<std::string_view, 4> kMorePuncts = {"^=", "##", ".*", "%:"};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  LexResult run() {
    bool line_start = true;  // only whitespace/comments seen on this line so far
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '\n') {
        ++line_;
        ++pos_;
        line_start = true;
        continue;
      }
      if (splice()) continue;
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
        continue;
      }
      if (c == '/' && peek(1) == '/') {
        skip_line_comment();
        continue;
      }
      if (c == '/' && peek(1) == '*') {
        skip_block_comment();
        continue;
      }
      if (c == '#' && line_start) {
        directive();
        line_start = true;
        continue;
      }
      line_start = false;
      const std::size_t start = pos_;
      const int start_line = line_;
      TokenKind kind = TokenKind::punct;
      if (raw_string_prefix()) {
        raw_string();
        kind = TokenKind::string_literal;
      } else if (const auto p = literal_prefix(); p > 0 || c == '"' || c == '\'') {
        pos_ += p;
        const char quote = src_[pos_];
        quoted(quote);
        kind = quote == '"' ? TokenKind::string_literal : TokenKind::char_literal;
      } else if (is_ident_start(c)) {
        while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
        kind = TokenKind::identifier;
      } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                 (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
        number();
        kind = TokenKind::number;
      } else {
        punct();
      }
      result_.tokens.push_back({kind, src_.substr(start, pos_ - start), start_line, line_});
    }
    return std::move(result_);
  }

 private:
  char peek(std::size_t ahead) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  // Consumes a backslash-newline (or backslash-CRLF).
  bool splice() {
    if (src_[pos_] != '\\') return false;
    if (peek(1) == '\n') {
      pos_ += 2;
      ++line_;
      return true;
    }
    if (peek(1) == '\r' && peek(2) == '\n') {
      pos_ += 3;
      ++line_;
      return true;
    }
    return false;
  }

  void skip_line_comment() {
    while (pos_ < src_.size() && src_[pos_] != '\n') {
      if (!splice()) ++pos_;
    }
  }

  void skip_block_comment() {
    pos_ += 2;
    while (pos_ < src_.size()) {
      if (src_[pos_] == '*' && peek(1) == '/') {
        pos_ += 2;
        return;
      }
      if (src_[pos_] == '\n') ++line_;
      ++pos_;
    }
    ++result_.unterminated;
  }

  void directive() {
    const std::size_t start = pos_;
    const int start_line = line_;
    while (pos_ < src_.size() && src_[pos_] != '\n') {
      if (splice()) continue;
      if (src_[pos_] == '/' && peek(1) == '*') {
        skip_block_comment();
        continue;
      }
      if (src_[pos_] == '/' && peek(1) == '/') {
        skip_line_comment();
        break;
      }
      if (src_[pos_] == '"' || src_[pos_] == '\'') {
        quoted(src_[pos_]);
        continue;
      }
      ++pos_;
    }
    result_.tokens.push_back(
        {TokenKind::directive, src_.substr(start, pos_ - start), start_line, line_});
  }

  // Length of an encoding prefix (L, u, U, u8) directly followed by a quote.
  std::size_t literal_prefix() const {
    for (std::string_view p : {"u8", "L", "u", "U"}) {
      if (src_.substr(pos_, p.size()) == p) {
        const char q = peek(p.size());
        if (q == '"' || q == '\'') return p.size();
      }
    }
    return 0;
  }

  bool raw_string_prefix() const {
    for (std::string_view p : {"R\"", "LR\"", "uR\"", "UR\"", "u8R\""}) {
      if (src_.substr(pos_, p.size()) == p) return true;
    }
    return false;
  }

  void raw_string() {
    pos_ = src_.find('"', pos_) + 1;
    const auto open = src_.find('(', pos_);
    if (open == std::string_view::npos || open - pos_ > 16) {
      ++result_.unterminated;
      return;
    }
    const std::string close = ")" + std::string(src_.substr(pos_, open - pos_)) + "\"";
    const auto end = src_.find(close, open + 1);
    const auto stop = end == std::string_view::npos ? src_.size() : end + close.size();
    if (end == std::string_view::npos) ++result_.unterminated;
    for (std::size_t i = pos_; i < stop; ++i) line_ += src_[i] == '\n';
    pos_ = stop;
  }

  void quoted(char quote) {
    ++pos_;
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '\\') {
        if (splice()) continue;
        pos_ += 2;
        continue;
      }
      if (c == quote) {
        ++pos_;
        return;
      }
      if (c == '\n') break;  // unterminated; resync at end of line
      ++pos_;
    }
    ++result_.unterminated;
  }

  void number() {
    // pp-number: digits, letters, '.', digit separators and exponent signs.
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if ((c == 'e' || c == 'E' || c == 'p' || c == 'P') && (peek(1) == '+' || peek(1) == '-')) {
        pos_ += 2;
      } else if (c == '\'' && is_ident_char(peek(1))) {
        pos_ += 2;
      } else if (is_ident_char(c) || c == '.') {
        ++pos_;
      } else {
        break;
      }
    }
  }

  void punct() {
    for (auto p : kLongPuncts) {
      if (src_.substr(pos_, p.size()) == p) {
        pos_ += p.size();
        return;
      }
    }
    for (auto p : kMorePuncts) {
      if (src_.substr(pos_, p.size()) == p) {
        pos_ += p.size();
        return;
      }
    }
    ++pos_;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  LexResult result_;
};

}  // namespace

LexResult lex(std::string_view source) { return Lexer(source).run(); }

std::string_view directive_name(const Token& token) {
  std::string_view t = token.text;
  std::size_t i = 1;  // past '#'
  while (i < t.size() && (t[i] == ' ' || t[i] == '\t')) ++i;
  std::size_t j = i;
  while (j < t.size() && is_ident_char(t[j])) ++j;
  return t.substr(i, j - i);
}

std::string_view directive_argument(const Token& token) {
  const auto name = directive_name(token);
  std::string_view rest = token.text.substr(name.data() + name.size() - token.text.data());
  while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest.front()))) rest.remove_prefix(1);
  while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest.back()))) rest.remove_suffix(1);
  return rest;
}

std::string strip_comments(std::string_view code) {
  std::string out;
  out.reserve(code.size());
  std::size_t i = 0;
  while (i < code.size()) {
    const char c = code[i];
    const char next = i + 1 < code.size() ? code[i + 1] : '\0';
    if (c == '/' && next == '/') {
      while (i < code.size() && code[i] != '\n') {
        if (code[i] == '\\' && i + 1 < code.size() && code[i + 1] == '\n') ++i;
        ++i;
      }
      out.push_back(' ');
    } else if (c == '/' && next == '*') {
      const auto end = code.find("*/", i + 2);
      i = end == std::string_view::npos ? code.size() : end + 2;
      out.push_back(' ');
    } else if (c == '"' ||
               (c == '\'' && (i == 0 || !std::isdigit(static_cast<unsigned char>(code[i - 1]))))) {
      // Character literals and strings: copy through the closing quote.
      out.push_back(c);
      ++i;
      while (i < code.size() && code[i] != c && code[i] != '\n') {
        if (code[i] == '\\' && i + 1 < code.size()) out.push_back(code[i++]);
        out.push_back(code[i++]);
      }
      if (i < code.size() && code[i] == c) out.push_back(code[i++]);
    } else if (c == 'R' && next == '"' &&
               (i == 0 || !is_ident_char(code[i - 1]) || code[i - 1] == 'L' || code[i - 1] == 'u' ||
                code[i - 1] == 'U' || code[i - 1] == '8')) {
      const auto open = code.find('(', i + 2);
      if (open == std::string_view::npos) {
        out.push_back(code[i++]);
        continue;
      }
      const std::string close = ")" + std::string(code.substr(i + 2, open - i - 2)) + "\"";
      const auto end = code.find(close, open + 1);
      const auto stop = end == std::string_view::npos ? code.size() : end + close.size();
      out.append(code.substr(i, stop - i));
      i = stop;
    } else {
      out.push_back(c);
      ++i;
    }
  }
  return out;
}

std::vector<std::string> code_tokens(std::string_view code) {
  std::vector<std::string> out;
  for (const auto& t : lex(code).tokens) {
    if (t.kind != TokenKind::directive) out.emplace_back(t.text);
  }
  return out;
}

}  // namespace vulnforge
