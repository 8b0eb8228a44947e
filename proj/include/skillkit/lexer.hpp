#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "skillkit/core.hpp"

namespace skillkit {

enum class TokenKind {
  Identifier,
  Number,
  String,
  LineComment,
  BlockComment,
  OpenDelim,
  CloseDelim,
  QuoteMark,
  KeywordArg,
  Operator,
  Punct,
  Error,  // unterminated string or block comment
};

struct Token {
  TokenKind kind = TokenKind::Punct;
  std::string text;
  Span span;
};

// Lossless tokenizer for SKILL source. Never throws: malformed regions
// become Error tokens and lexing continues. Concatenating the gaps
// (whitespace) and token texts reproduces the input byte for byte.
std::vector<Token> lex(std::string_view text);

bool is_comment(const Token& token);

// Content of a comment token: text after the leading ';' run, or between
// the block delimiters. The delimiters themselves are excluded.
std::string comment_body(std::string_view comment_text);

std::string to_string(TokenKind kind);

}  // namespace skillkit
