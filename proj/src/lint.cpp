#include "skillkit/lint.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include "skillkit/lexer.hpp"
#include "skillkit/util.hpp"

namespace skillkit {
namespace {

struct Linter {
  std::string_view text;
  const LintConfig& cfg;
  std::vector<Token> tokens;
  std::vector<LintFinding> findings;

  void add(std::string rule_id, Span span, int deduction, std::string message) {
    findings.push_back({std::move(rule_id), span, deduction, std::move(message)});
  }

  void check_empty() {
    if (tokens.empty()) {
      add("syntax.empty-file", {0, text.size()}, cfg.empty_file, "file has no content");
    }
  }

  void check_delimiters() {
    std::vector<const Token*> stack;
    for (const Token& t : tokens) {
      if (t.kind == TokenKind::OpenDelim) {
        stack.push_back(&t);
      } else if (t.kind == TokenKind::CloseDelim) {
        if (stack.empty()) {
          add("syntax.unbalanced-delimiters", t.span, cfg.unbalanced_delimiters,
              "closing '" + t.text + "' without a matching opener");
        } else if (expected_close(stack.back()->text[0]) != t.text[0]) {
          add("syntax.unbalanced-delimiters", t.span, cfg.unbalanced_delimiters,
              "'" + t.text + "' does not match '" + stack.back()->text + "'");
          stack.pop_back();
        } else {
          stack.pop_back();
        }
      }
    }
    for (const Token* open : stack) {
      add("syntax.unbalanced-delimiters", open->span, cfg.unbalanced_delimiters,
          "'" + open->text + "' is never closed");
    }
  }

  static char expected_close(char open) {
    switch (open) {
      case '(': return ')';
      case '[': return ']';
      default: return '}';
    }
  }

  void check_unterminated() {
    for (const Token& t : tokens) {
      if (t.kind != TokenKind::Error) continue;
      const bool is_block = t.text.size() >= 2 && t.text[0] == '/' && t.text[1] == '*';
      add("syntax.unterminated", t.span, cfg.unterminated_token,
          is_block ? "block comment is never closed" : "string is never closed");
    }
  }

  void check_lines() {
    bool long_reported = false;
    bool saw_space_indent = false;
    bool saw_tab_indent = false;
    bool mixed_reported = false;
    std::size_t offset = 0;
    for (std::string_view line : split_lines(text)) {
      std::size_t len = line.size();
      if (len > 0 && line.back() == '\r') --len;
      if (!long_reported && len > cfg.max_line_length) {
        add("style.long-line", {offset, offset + len}, cfg.long_line,
            "line exceeds " + std::to_string(cfg.max_line_length) + " characters");
        long_reported = true;
      }
      bool line_space = false;
      bool line_tab = false;
      for (std::size_t k = 0; k < len && (line[k] == ' ' || line[k] == '\t'); ++k) {
        if (line[k] == ' ') line_space = true;
        if (line[k] == '\t') line_tab = true;
      }
      saw_space_indent = saw_space_indent || line_space;
      saw_tab_indent = saw_tab_indent || line_tab;
      if (!mixed_reported && saw_space_indent && saw_tab_indent) {
        add("style.mixed-indentation", {offset, offset + len}, cfg.mixed_indentation,
            "indentation mixes tabs and spaces");
        mixed_reported = true;
      }
      offset += line.size() + 1;
    }
  }

  void check_comma_spacing() {
    int depth = 0;
    for (const Token& t : tokens) {
      if (t.kind == TokenKind::OpenDelim) {
        ++depth;
      } else if (t.kind == TokenKind::CloseDelim) {
        if (depth > 0) --depth;
      } else if (t.kind == TokenKind::Punct && t.text == "," && depth > 0) {
        if (t.span.end < text.size()) {
          const char next = text[t.span.end];
          if (!is_space_byte(next) && next != ')' && next != ']' && next != '}') {
            add("style.comma-spacing", t.span, cfg.comma_spacing, "missing space after comma");
          }
        }
      }
    }
  }

  void check_shadowing(const ParseResult& parsed) {
    std::map<std::string, Span> shadowed;  // name -> first occurrence
    const auto consider = [&](const std::string& name, Span span) {
      if (!std::count(cfg.builtins.begin(), cfg.builtins.end(), name)) return;
      shadowed.emplace(name, span);
    };
    // assignments: identifier directly followed by '='
    for (std::size_t k = 0; k + 1 < tokens.size(); ++k) {
      if (tokens[k].kind == TokenKind::Identifier && tokens[k + 1].kind == TokenKind::Operator &&
          tokens[k + 1].text == "=") {
        consider(tokens[k].text, tokens[k].span);
      }
    }
    // setq in either syntax
    for (std::size_t k = 0; k + 1 < tokens.size(); ++k) {
      if (tokens[k].kind == TokenKind::Identifier && tokens[k].text == "setq" &&
          tokens[k + 1].kind != TokenKind::OpenDelim) {
        consider(tokens[k + 1].text, tokens[k + 1].span);
      }
      if (tokens[k].kind == TokenKind::Identifier && tokens[k].text == "setq" &&
          tokens[k + 1].kind == TokenKind::OpenDelim && k + 2 < tokens.size() &&
          tokens[k + 2].kind == TokenKind::Identifier) {
        consider(tokens[k + 2].text, tokens[k + 2].span);
      }
    }
    // procedure parameters
    walk_forms(parsed.forms, [&](const Form& f) {
      if (f.kind == FormKind::ProcedureDef && f.params) {
        for (const std::string& p : *f.params) consider(p, {f.span.start, f.header_end});
      }
    });
    for (const auto& [name, span] : shadowed) {
      add("style.shadowed-builtin", span, cfg.shadowed_builtin,
          "'" + name + "' shadows a built-in");
    }
  }

  void check_append_in_loop(const ParseResult& parsed) {
    walk_forms(parsed.forms, [&](const Form& f) {
      if (f.kind != FormKind::Construct || !f.name || !cfg.syntax.is_loop(*f.name)) return;
      for (std::size_t k = f.first_token; k < f.last_token && k < tokens.size(); ++k) {
        if (tokens[k].kind == TokenKind::Identifier && tokens[k].text == "append") {
          add("efficiency.append-in-loop", tokens[k].span, cfg.append_in_loop,
              "append inside '" + *f.name + "' rebuilds the list on every iteration");
          break;
        }
      }
    });
  }

  void check_repeated_expressions(const ParseResult& parsed) {
    for (const Form& top : parsed.forms) {
      if (top.kind == FormKind::CommentBlock) continue;
      std::map<std::string, std::pair<std::size_t, Span>> counts;
      collect_calls(top, counts);
      for (const auto& [expr, entry] : counts) {
        if (entry.first >= cfg.repeated_expression_min_count) {
          add("efficiency.repeated-expression", entry.second, cfg.repeated_expression,
              "'" + expr + "' is computed " + std::to_string(entry.first) + " times");
        }
      }
    }
  }

  // Normalized call expressions in a subtree, counted by text.
  void collect_calls(const Form& form, std::map<std::string, std::pair<std::size_t, Span>>& out) {
    for (const Form& child : form.children) {
      if (child.kind == FormKind::CommentBlock) continue;
      const bool call_like = child.name.has_value() && !child.atom &&
                             child.last_token - child.first_token >= 4;
      if (call_like && child.span.end <= text.size()) {
        const std::string key =
            normalize_whitespace(text.substr(child.span.start, child.span.size()));
        auto [it, inserted] = out.emplace(key, std::make_pair(std::size_t{0}, child.span));
        ++it->second.first;
      }
      collect_calls(child, out);
    }
  }

  template <typename Fn>
  static void walk_forms(const std::vector<Form>& forms, Fn&& fn) {
    for (const Form& f : forms) {
      fn(f);
      walk_forms(f.children, fn);
    }
  }
};

}  // namespace

LintReport lint_file(std::string_view text, const LintConfig& config) {
  Linter linter{text, config, lex(text), {}};
  linter.check_empty();
  if (!linter.tokens.empty()) {
    const ParseResult parsed = parse(text, linter.tokens, config.syntax);
    linter.check_delimiters();
    linter.check_unterminated();
    linter.check_lines();
    linter.check_comma_spacing();
    linter.check_shadowing(parsed);
    linter.check_append_in_loop(parsed);
    linter.check_repeated_expressions(parsed);
  }

  LintReport report;
  report.findings = std::move(linter.findings);
  long long total = 0;
  for (const LintFinding& f : report.findings) {
    total += f.deduction;
    if (f.rule_id.starts_with("syntax.")) report.grade = LintGrade::Fail;
  }
  report.iq = static_cast<int>(std::max(0LL, 100LL - total));
  return report;
}

int delta_liq(const Pair& pair, std::string_view prediction, const SourceFile& file,
              const LintConfig& config) {
  if (pair.file_id != file.id) {
    throw std::invalid_argument("delta_liq: pair does not belong to this file");
  }
  if (pair.output_span.end > file.text.size() ||
      pair.output_span.start > pair.output_span.end) {
    throw std::out_of_range("delta_liq: output span exceeds file text");
  }
  std::string patched;
  patched.reserve(file.text.size() + prediction.size());
  patched.append(file.text, 0, pair.output_span.start);
  patched.append(prediction);
  patched.append(file.text, pair.output_span.end,
                 file.text.size() - pair.output_span.end);
  const LintReport before = lint_file(file.text, config);
  const LintReport after = lint_file(patched, config);
  return after.iq - before.iq;
}

}  // namespace skillkit
