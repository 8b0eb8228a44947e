#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "skillkit/lexer.hpp"

namespace skillkit {

enum class FormKind { ProcedureDef, Statement, Construct, CommentBlock };

// A region of structure recovered from the token stream. Parsing is total:
// malformed input degrades to statements plus diagnostics, never a failure.
struct Form {
  FormKind kind = FormKind::Statement;
  Span span;
  std::optional<std::string> name;                 // procedure, construct keyword, or callee
  std::optional<std::vector<std::string>> params;  // procedure-def only
  std::optional<Span> body_span;                   // procedure-def only
  std::vector<Form> children;
  std::size_t first_token = 0;  // token index range [first_token, last_token)
  std::size_t last_token = 0;
  std::size_t header_end = 0;  // procedure-def: byte offset just past the parameter list
  bool atom = false;           // single literal or identifier element
};

struct ParseDiagnostic {
  Span span;
  std::string message;
};

struct SyntaxConfig {
  std::vector<std::string> definition_keywords{"procedure", "defun", "globalProc",
                                               "pcDefinePCell"};
  std::vector<std::string> construct_keywords{"foreach", "for",  "while", "when",
                                              "unless",  "if",   "case",  "caseq",
                                              "cond",    "let",  "letseq", "prog",
                                              "progn"};
  std::vector<std::string> loop_keywords{"foreach", "for", "while"};

  bool is_definition(std::string_view word) const;
  bool is_construct(std::string_view word) const;
  bool is_loop(std::string_view word) const;
};

struct ParseResult {
  std::vector<Form> forms;
  std::vector<ParseDiagnostic> diagnostics;
};

// Builds the form tree for a token stream produced by lex(text).
ParseResult parse(std::string_view text, const std::vector<Token>& tokens,
                  const SyntaxConfig& config = {});

struct ProcedureInfo {
  std::string name;
  Span header_span;  // definition keyword through the parameter list
  Span body_span;
  Span full_span;
  std::optional<Span> preceding_comment;  // sibling comment within one blank line
  const Form* form = nullptr;             // borrowed from the ParseResult
};

// All procedure definitions in source order, including nested ones.
std::vector<ProcedureInfo> extract_procedures(const std::vector<Form>& forms,
                                              std::string_view text);

struct CommentBlockInfo {
  Span comment_span;
  // Next sibling statement or construct within one blank line; null when the
  // comment is trailing, separated, or documents a procedure definition.
  const Form* following_form = nullptr;
};

std::vector<CommentBlockInfo> extract_comment_blocks(const std::vector<Form>& forms,
                                                     std::string_view text);

// Number of whitespace-only lines strictly between two byte offsets.
std::size_t blank_lines_between(std::string_view text, std::size_t from, std::size_t to);

}  // namespace skillkit
