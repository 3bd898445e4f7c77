#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace vulnforge {

enum class TokenKind {
  identifier,  // includes keywords
  number,
  string_literal,
  char_literal,
  punct,
  directive,  // a whole preprocessor line, continuations included
};

struct Token {
  TokenKind kind;
  std::string_view text;  // view into the lexed source
  int line = 0;           // 1-based line of the first character
  int end_line = 0;       // 1-based line of the last character
};

struct LexResult {
  std::vector<Token> tokens;
  std::size_t unterminated = 0;  // unterminated comments or literals
};

// Tokenizer for C and C++ source as written (no macro expansion). Handles
// //, /* */ comments, escaped string and character literals with encoding
// prefixes, raw strings, digit separators and backslash-newline splices.
// Comments never produce tokens.
LexResult lex(std::string_view source);

// For a directive token: the directive keyword ("if", "ifdef", "else", ...)
// and the remaining text.
std::string_view directive_name(const Token& token);
std::string_view directive_argument(const Token& token);

// Copies `code` with every comment replaced by one space; literals are left
// untouched, so "//" inside a string survives.
std::string strip_comments(std::string_view code);

// Token texts for featurization: comments and preprocessor lines dropped.
std::vector<std::string> code_tokens(std::string_view code);

}  // namespace vulnforge
