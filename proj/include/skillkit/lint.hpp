#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "skillkit/core.hpp"
#include "skillkit/parser.hpp"

namespace skillkit {

// Deductions per rule. Rules whose id starts with "syntax." flip the grade
// to fail; the rest only lower the quality score.
struct LintConfig {
  int unbalanced_delimiters = 40;  // per occurrence
  int unterminated_token = 40;     // per occurrence (string or block comment)
  int empty_file = 100;
  int long_line = 2;  // once per file
  std::size_t max_line_length = 120;
  int mixed_indentation = 2;  // once per file
  int comma_spacing = 1;      // per occurrence, inside argument lists only
  int shadowed_builtin = 5;   // per distinct name
  int append_in_loop = 5;     // per loop form
  int repeated_expression = 3;  // per distinct expression per top-level form
  std::size_t repeated_expression_min_count = 3;
  std::vector<std::string> builtins{
      "list",   "car",    "cdr",     "cons",    "append",  "length",   "nth",
      "member", "reverse", "sort",   "mapcar",  "setof",   "strcat",   "sprintf",
      "printf", "println", "sqrt",   "abs",     "max",     "min",      "floor",
      "ceiling", "round",  "equal",  "eq",      "null",    "plus",     "times",
      "difference", "quotient", "boundp", "get", "putprop", "apply",   "lambda",
      "t",      "nil"};
  SyntaxConfig syntax;
};

LintReport lint_file(std::string_view text, const LintConfig& config = {});

// Quality delta when the pair's output region is replaced by the prediction
// inside its owning file. Positive means the prediction lints better.
int delta_liq(const Pair& pair, std::string_view prediction, const SourceFile& file,
              const LintConfig& config = {});

}  // namespace skillkit
