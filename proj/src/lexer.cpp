#include "skillkit/lexer.hpp"

#include <array>
#include <cctype>
#include <stdexcept>

#include "skillkit/util.hpp"

namespace skillkit {
namespace {

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) != 0 || c == '_';
}

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool is_hex_digit(char c) {
  return is_digit(c) || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
}

constexpr std::array<std::string_view, 12> kTwoCharOps = {
    "->", "~>", "==", "!=", "<=", ">=", "&&", "||", "++", "--", "<<", ">>",
};

constexpr std::string_view kOneCharOps = "=+-*/<>!&|~%^";

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> run() {
    while (i_ < text_.size()) {
      const char c = text_[i_];
      if (is_space_byte(c)) {
        ++i_;
        continue;
      }
      if (c == ';') {
        lex_line_comment();
      } else if (c == '/' && peek(1) == '*') {
        lex_block_comment();
      } else if (c == '"') {
        lex_string();
      } else if (c == '\'') {
        push(TokenKind::QuoteMark, i_, i_ + 1);
      } else if (c == '?' && i_ + 1 < text_.size() && is_ident_start(text_[i_ + 1])) {
        lex_keyword_arg();
      } else if (c == '@' && i_ + 1 < text_.size() && is_ident_start(text_[i_ + 1])) {
        // lambda-list markers such as @optional, @key, @rest
        lex_at_identifier();
      } else if (is_digit(c)) {
        lex_number();
      } else if (is_ident_start(c)) {
        lex_identifier();
      } else if (c == '(' || c == '[' || c == '{') {
        push(TokenKind::OpenDelim, i_, i_ + 1);
      } else if (c == ')' || c == ']' || c == '}') {
        push(TokenKind::CloseDelim, i_, i_ + 1);
      } else if (!lex_operator()) {
        push(TokenKind::Punct, i_, i_ + 1);
      }
    }
    return std::move(tokens_);
  }

 private:
  char peek(std::size_t ahead) const {
    return i_ + ahead < text_.size() ? text_[i_ + ahead] : '\0';
  }

  // Pushes a token covering [start, end) and moves the cursor to end.
  void push(TokenKind kind, std::size_t start, std::size_t end) {
    tokens_.push_back({kind, std::string(text_.substr(start, end - start)), {start, end}});
    i_ = end;
  }

  void lex_line_comment() {
    std::size_t end = text_.find('\n', i_);
    if (end == std::string_view::npos) end = text_.size();
    push(TokenKind::LineComment, i_, end);
  }

  void lex_block_comment() {
    const std::size_t close = text_.find("*/", i_ + 2);
    if (close == std::string_view::npos) {
      // unterminated: error token to end of input
      push(TokenKind::Error, i_, text_.size());
      return;
    }
    push(TokenKind::BlockComment, i_, close + 2);
  }

  void lex_string() {
    std::size_t j = i_ + 1;
    while (j < text_.size()) {
      const char c = text_[j];
      if (c == '\\' && j + 1 < text_.size()) {
        j += 2;
        continue;
      }
      if (c == '"') {
        push(TokenKind::String, i_, j + 1);
        return;
      }
      if (c == '\n') break;
      ++j;
    }
    // unterminated: error token to end of line, lexing resumes after it
    push(TokenKind::Error, i_, j);
  }

  void lex_keyword_arg() {
    std::size_t j = i_ + 1;
    while (j < text_.size() && is_ident_char(text_[j])) ++j;
    push(TokenKind::KeywordArg, i_, j);
  }

  void lex_at_identifier() {
    std::size_t j = i_ + 1;
    while (j < text_.size() && is_ident_char(text_[j])) ++j;
    push(TokenKind::Identifier, i_, j);
  }

  void lex_number() {
    std::size_t j = i_;
    if (text_[j] == '0' && (peek(1) == 'x' || peek(1) == 'X') && i_ + 2 < text_.size() &&
        is_hex_digit(text_[i_ + 2])) {
      j += 2;
      while (j < text_.size() && is_hex_digit(text_[j])) ++j;
      push(TokenKind::Number, i_, j);
      return;
    }
    while (j < text_.size() && is_digit(text_[j])) ++j;
    if (j < text_.size() && text_[j] == '.' && j + 1 < text_.size() && is_digit(text_[j + 1])) {
      ++j;
      while (j < text_.size() && is_digit(text_[j])) ++j;
    }
    if (j < text_.size() && (text_[j] == 'e' || text_[j] == 'E')) {
      std::size_t k = j + 1;
      if (k < text_.size() && (text_[k] == '+' || text_[k] == '-')) ++k;
      if (k < text_.size() && is_digit(text_[k])) {
        while (k < text_.size() && is_digit(text_[k])) ++k;
        j = k;
      }
    }
    push(TokenKind::Number, i_, j);
  }

  void lex_identifier() {
    std::size_t j = i_;
    while (j < text_.size() && is_ident_char(text_[j])) ++j;
    push(TokenKind::Identifier, i_, j);
  }

  bool lex_operator() {
    if (i_ + 1 < text_.size()) {
      const std::string_view two = text_.substr(i_, 2);
      for (std::string_view op : kTwoCharOps) {
        if (two == op) {
          push(TokenKind::Operator, i_, i_ + 2);
          return true;
        }
      }
    }
    if (kOneCharOps.find(text_[i_]) != std::string_view::npos) {
      push(TokenKind::Operator, i_, i_ + 1);
      return true;
    }
    return false;
  }

  std::string_view text_;
  std::size_t i_ = 0;
  std::vector<Token> tokens_;
};

}  // namespace

std::vector<Token> lex(std::string_view text) { return Lexer(text).run(); }

bool is_comment(const Token& token) {
  return token.kind == TokenKind::LineComment || token.kind == TokenKind::BlockComment;
}

std::string comment_body(std::string_view comment_text) {
  if (comment_text.starts_with("/*")) {
    std::string_view body = comment_text.substr(2);
    if (body.ends_with("*/")) body.remove_suffix(2);
    return std::string(body);
  }
  std::size_t k = 0;
  while (k < comment_text.size() && comment_text[k] == ';') ++k;
  return std::string(comment_text.substr(k));
}

std::string to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::Identifier: return "identifier";
    case TokenKind::Number: return "number";
    case TokenKind::String: return "string";
    case TokenKind::LineComment: return "line-comment";
    case TokenKind::BlockComment: return "block-comment";
    case TokenKind::OpenDelim: return "open-delim";
    case TokenKind::CloseDelim: return "close-delim";
    case TokenKind::QuoteMark: return "quote-mark";
    case TokenKind::KeywordArg: return "keyword-arg";
    case TokenKind::Operator: return "operator";
    case TokenKind::Punct: return "punct";
    case TokenKind::Error: return "error";
  }
  throw std::invalid_argument("unknown TokenKind");
}

}  // namespace skillkit
