#include "doctest.h"

#include <string>
#include <vector>

#include "skillkit/lexer.hpp"
#include "skillkit/rng.hpp"
#include "skillkit/util.hpp"

using namespace skillkit;

namespace {

std::vector<TokenKind> kinds_of(std::string_view text) {
  std::vector<TokenKind> kinds;
  for (const Token& t : lex(text)) kinds.push_back(t.kind);
  return kinds;
}

// True when the token stream covers the input losslessly: token texts match
// their spans, spans never overlap, and every gap is pure whitespace.
bool lossless(std::string_view text) {
  std::size_t cursor = 0;
  for (const Token& t : lex(text)) {
    if (t.span.start < cursor || t.span.end > text.size()) return false;
    for (std::size_t k = cursor; k < t.span.start; ++k) {
      if (!is_space_byte(text[k])) return false;
    }
    if (text.substr(t.span.start, t.span.size()) != t.text) return false;
    cursor = t.span.end;
  }
  for (std::size_t k = cursor; k < text.size(); ++k) {
    if (!is_space_byte(text[k])) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("lexer") {

TEST_CASE("comment then assignment") {
  const auto kinds = kinds_of("; hi\nx = 1");
  REQUIRE(kinds.size() == 4);
  CHECK(kinds[0] == TokenKind::LineComment);
  CHECK(kinds[1] == TokenKind::Identifier);
  CHECK(kinds[2] == TokenKind::Operator);
  CHECK(kinds[3] == TokenKind::Number);
}

TEST_CASE("call-style procedure definition") {
  const auto kinds = kinds_of("procedure(foo(a) a+1)");
  const std::vector<TokenKind> want{
      TokenKind::Identifier, TokenKind::OpenDelim, TokenKind::Identifier, TokenKind::OpenDelim,
      TokenKind::Identifier, TokenKind::CloseDelim, TokenKind::Identifier, TokenKind::Operator,
      TokenKind::Number,     TokenKind::CloseDelim};
  CHECK(kinds == want);
}

TEST_CASE("unterminated block comment becomes one error token") {
  const auto tokens = lex("/* unterminated");
  REQUIRE(tokens.size() == 1);
  CHECK(tokens[0].kind == TokenKind::Error);
  CHECK(tokens[0].span == Span{0, 15});
}

TEST_CASE("unterminated string recovers at end of line") {
  const auto tokens = lex("x = \"oops\ny = 2");
  REQUIRE(tokens.size() == 6);
  CHECK(tokens[2].kind == TokenKind::Error);
  CHECK(tokens[3].kind == TokenKind::Identifier);
  CHECK(tokens[3].text == "y");
}

TEST_CASE("skill-specific token shapes") {
  const auto tokens = lex("'sym ?width 3.5 item~>name box->layer @optional");
  REQUIRE(tokens.size() == 11);
  CHECK(tokens[0].kind == TokenKind::QuoteMark);
  CHECK(tokens[1].text == "sym");
  CHECK(tokens[2].kind == TokenKind::KeywordArg);
  CHECK(tokens[2].text == "?width");
  CHECK(tokens[3].kind == TokenKind::Number);
  CHECK(tokens[3].text == "3.5");
  CHECK(tokens[5].kind == TokenKind::Operator);
  CHECK(tokens[5].text == "~>");
  CHECK(tokens[8].kind == TokenKind::Operator);
  CHECK(tokens[8].text == "->");
  CHECK(tokens[10].kind == TokenKind::Identifier);
  CHECK(tokens[10].text == "@optional");
}

TEST_CASE("string escapes keep the closing quote honest") {
  const auto tokens = lex(R"("a \"quoted\" part" rest)");
  REQUIRE(tokens.size() == 2);
  CHECK(tokens[0].kind == TokenKind::String);
  CHECK(tokens[0].text == R"("a \"quoted\" part")");
}

TEST_CASE("semicolon inside a string is not a comment") {
  const auto tokens = lex("msg = \"a; b\"");
  REQUIRE(tokens.size() == 3);
  CHECK(tokens[2].kind == TokenKind::String);
}

TEST_CASE("losslessness on random ascii inputs") {
  Rng rng(20240817);
  const std::string alphabet =
      "abcXYZ019 \t\n()[]{};'\"/*=+-<>~?@_.,:%!";
  for (int round = 0; round < 200; ++round) {
    std::string text;
    const std::size_t len = rng.below(120);
    for (std::size_t k = 0; k < len; ++k) {
      text.push_back(alphabet[rng.below(alphabet.size())]);
    }
    CAPTURE(text);
    REQUIRE(lossless(text));
  }
}

TEST_CASE("losslessness on fixture-shaped code") {
  const std::string text =
      "/* fill notch */\nprocedure(fxFill(cv layer)\n  w = cv~>bBox\n"
      "  dbCreateRect(cv layer list(0:0 1:2))\n)\n; tail note\n";
  CHECK(lossless(text));
}

TEST_CASE("comment_body strips only the delimiters") {
  CHECK(comment_body(";; two semis") == " two semis");
  CHECK(comment_body("/* body */") == " body ");
  CHECK(comment_body("/* open only") == " open only");
  CHECK(comment_body(";") == "");
}

}  // TEST_SUITE
