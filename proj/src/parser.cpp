#include "skillkit/parser.hpp"

#include <algorithm>

namespace skillkit {
namespace {

bool list_contains(const std::vector<std::string>& words, std::string_view word) {
  for (const std::string& w : words) {
    if (w == word) return true;
  }
  return false;
}

char matching_close(char open) {
  switch (open) {
    case '(': return ')';
    case '[': return ']';
    case '{': return '}';
  }
  return ')';
}

class Parser {
 public:
  Parser(std::string_view text, const std::vector<Token>& tokens, const SyntaxConfig& config)
      : text_(text), toks_(tokens), cfg_(config) {}

  ParseResult run() {
    ParseResult result;
    std::size_t i = 0;
    result.forms = parse_elements(i, std::nullopt);
    result.diagnostics = std::move(diags_);
    return result;
  }

 private:
  void diag(Span span, std::string message) { diags_.push_back({span, std::move(message)}); }

  bool same_line(std::size_t from, std::size_t to) const {
    for (std::size_t k = from; k < to && k < text_.size(); ++k) {
      if (text_[k] == '\n') return false;
    }
    return true;
  }

  static std::vector<Form> non_atoms(std::vector<Form> elements) {
    std::vector<Form> out;
    for (Form& f : elements) {
      if (!f.atom) out.push_back(std::move(f));
    }
    return out;
  }

  // Parses sibling elements until end of input or, when close is set, until
  // a closing delimiter is seen (left for the caller to consume).
  std::vector<Form> parse_elements(std::size_t& i, std::optional<char> close) {
    std::vector<Form> forms;
    while (i < toks_.size()) {
      const Token& t = toks_[i];
      if (t.kind == TokenKind::CloseDelim) {
        if (close) return forms;
        diag(t.span, "unmatched closing delimiter '" + t.text + "'");
        Form f;
        f.span = t.span;
        f.first_token = i;
        f.last_token = i + 1;
        f.atom = true;
        forms.push_back(std::move(f));
        ++i;
        continue;
      }
      if (is_comment(t)) {
        forms.push_back(parse_comment_block(i));
        continue;
      }
      forms.push_back(parse_statement(i));
    }
    return forms;
  }

  // A run of comment tokens separated by at most one blank line.
  Form parse_comment_block(std::size_t& i) {
    const std::size_t start = i;
    std::size_t last = i;
    while (last + 1 < toks_.size() && is_comment(toks_[last + 1]) &&
           blank_lines_between(text_, toks_[last].span.end, toks_[last + 1].span.start) <= 1) {
      ++last;
    }
    Form f;
    f.kind = FormKind::CommentBlock;
    f.span = {toks_[start].span.start, toks_[last].span.end};
    f.first_token = start;
    f.last_token = last + 1;
    i = last + 1;
    return f;
  }

  // An expression statement: primaries glued by same-line infix operators.
  // A definition or construct standing alone is returned directly.
  Form parse_statement(std::size_t& i) {
    const std::size_t start_tok = i;
    std::vector<Form> primaries;
    bool had_operator = false;
    bool expect_operand = true;
    while (i < toks_.size()) {
      const Token& t = toks_[i];
      if (t.kind == TokenKind::CloseDelim || is_comment(t)) break;
      if (expect_operand) {
        if (t.kind == TokenKind::Operator) {
          had_operator = true;
          ++i;
          continue;
        }
        Form p = parse_primary(i);
        const bool standalone_special =
            (p.kind == FormKind::ProcedureDef || p.kind == FormKind::Construct) &&
            p.first_token == start_tok;
        if (standalone_special) return p;
        primaries.push_back(std::move(p));
        expect_operand = false;
        continue;
      }
      if (t.kind == TokenKind::Operator && same_line(toks_[i - 1].span.end, t.span.start)) {
        had_operator = true;
        ++i;
        expect_operand = true;
        continue;
      }
      break;
    }
    if (!had_operator && primaries.size() == 1) return std::move(primaries.front());

    Form f;
    f.kind = FormKind::Statement;
    f.first_token = start_tok;
    f.last_token = i;
    f.span = {toks_[start_tok].span.start, toks_[i - 1].span.end};
    f.children = non_atoms(std::move(primaries));
    return f;
  }

  Form parse_primary(std::size_t& i) {
    const Token& t = toks_[i];
    switch (t.kind) {
      case TokenKind::Identifier:
        if (i + 1 < toks_.size() && toks_[i + 1].kind == TokenKind::OpenDelim &&
            toks_[i + 1].text != "{" && toks_[i + 1].span.start == t.span.end) {
          return parse_call(i);
        }
        return atom(i);
      case TokenKind::QuoteMark: {
        const std::size_t quote_tok = i;
        ++i;
        if (i >= toks_.size() || toks_[i].kind == TokenKind::CloseDelim ||
            toks_[i].kind == TokenKind::Operator || is_comment(toks_[i])) {
          --i;
          return atom(i);
        }
        Form inner = parse_primary(i);
        Form f = std::move(inner);
        f.span.start = toks_[quote_tok].span.start;
        f.first_token = quote_tok;
        return f;
      }
      case TokenKind::OpenDelim:
        return parse_group(i);
      default:
        return atom(i);
    }
  }

  Form atom(std::size_t& i) {
    Form f;
    f.kind = FormKind::Statement;
    f.span = toks_[i].span;
    f.first_token = i;
    f.last_token = i + 1;
    f.atom = true;
    ++i;
    return f;
  }

  // Consumes the expected closing delimiter, or recovers: a mismatched
  // closer is left for an outer group, a missing one is reported at open.
  std::size_t finish_group(std::size_t& i, std::size_t open_tok, char want) {
    if (i < toks_.size() && toks_[i].kind == TokenKind::CloseDelim) {
      if (toks_[i].text[0] == want) {
        const std::size_t end = toks_[i].span.end;
        ++i;
        return end;
      }
      diag(toks_[i].span, std::string("expected '") + want + "' before '" + toks_[i].text + "'");
      return toks_[i].span.start;
    }
    diag(toks_[open_tok].span, "unclosed delimiter");
    return i > 0 ? toks_[i - 1].span.end : toks_[open_tok].span.end;
  }

  // Call syntax: an identifier juxtaposed with '(' (or '[' for array refs).
  Form parse_call(std::size_t& i) {
    const std::size_t name_tok = i;
    const std::size_t open_tok = i + 1;
    const std::string& name = toks_[name_tok].text;
    const char open = toks_[open_tok].text[0];
    const char want = matching_close(open);
    i += 2;
    std::vector<Form> elements = parse_elements(i, want);
    const std::size_t end_off = finish_group(i, open_tok, want);
    const Span span{toks_[name_tok].span.start, end_off};

    if (open == '(' && cfg_.is_definition(name)) {
      if (auto def = make_definition(name, elements, /*skip=*/0, span, name_tok, i)) {
        return *std::move(def);
      }
      diag(span, "malformed definition '" + name + "'");
    }
    Form f;
    f.kind = (open == '(' && cfg_.is_construct(name)) ? FormKind::Construct : FormKind::Statement;
    f.name = name;
    f.span = span;
    f.first_token = name_tok;
    f.last_token = i;
    f.children = non_atoms(std::move(elements));
    return f;
  }

  Form parse_group(std::size_t& i) {
    const std::size_t open_tok = i;
    const char open = toks_[open_tok].text[0];
    const char want = matching_close(open);
    ++i;
    std::vector<Form> elements = parse_elements(i, want);
    const std::size_t end_off = finish_group(i, open_tok, want);
    const Span span{toks_[open_tok].span.start, end_off};

    // Lisp-style special forms: the head of a parenthesised list is a bare
    // keyword, e.g. (defun f (a) ...) or (foreach x lst ...).
    if (open == '(' && !elements.empty() && elements.front().atom &&
        toks_[elements.front().first_token].kind == TokenKind::Identifier) {
      const std::string& head = toks_[elements.front().first_token].text;
      if (cfg_.is_definition(head)) {
        if (auto def = make_definition(head, elements, /*skip=*/1, span, open_tok, i)) {
          return *std::move(def);
        }
        diag(span, "malformed definition '" + head + "'");
      } else if (cfg_.is_construct(head)) {
        Form f;
        f.kind = FormKind::Construct;
        f.name = head;
        f.span = span;
        f.first_token = open_tok;
        f.last_token = i;
        std::vector<Form> rest(std::make_move_iterator(elements.begin() + 1),
                               std::make_move_iterator(elements.end()));
        f.children = non_atoms(std::move(rest));
        return f;
      }
    }
    Form f;
    f.kind = FormKind::Statement;
    f.span = span;
    f.first_token = open_tok;
    f.last_token = i;
    f.children = non_atoms(std::move(elements));
    return f;
  }

  bool is_call_form(const Form& f) const {
    return !f.atom && f.name.has_value() && f.first_token < toks_.size() &&
           toks_[f.first_token].kind == TokenKind::Identifier;
  }

  bool is_group_form(const Form& f) const {
    return !f.atom && f.first_token < toks_.size() &&
           toks_[f.first_token].kind == TokenKind::OpenDelim;
  }

  bool is_identifier_atom(const Form& f) const {
    return f.atom && toks_[f.first_token].kind == TokenKind::Identifier;
  }

  // Builds a procedure-def form from the elements of a definition call or
  // list. skip is 1 for Lisp style, where elements[0] is the keyword itself.
  // Returns nullopt when the expected header shape is missing.
  std::optional<Form> make_definition(const std::string& keyword, std::vector<Form>& elements,
                                      std::size_t skip, Span span, std::size_t first_token,
                                      std::size_t last_token) {
    std::string name;
    std::vector<std::string> params;
    std::size_t header_end = 0;
    std::size_t body_from = 0;

    const auto elem = [&](std::size_t k) -> Form* {
      return skip + k < elements.size() ? &elements[skip + k] : nullptr;
    };

    if (keyword == "defun" && elem(0) && is_identifier_atom(*elem(0)) && elem(1) &&
        is_group_form(*elem(1))) {
      name = toks_[elem(0)->first_token].text;
      params = params_in_range(elem(1)->first_token, elem(1)->last_token);
      header_end = elem(1)->span.end;
      body_from = skip + 2;
    } else if (keyword == "pcDefinePCell" && elem(0) && !elem(0)->atom && elem(1) &&
               is_group_form(*elem(1))) {
      name = pcell_name(*elem(0));
      params = params_in_range(elem(1)->first_token, elem(1)->last_token);
      header_end = elem(1)->span.end;
      body_from = skip + 2;
    } else if (elem(0) && is_call_form(*elem(0))) {
      // procedure(foo(a b) ...) and the equivalent globalProc/defun spelling
      name = *elem(0)->name;
      params = params_in_range(elem(0)->first_token, elem(0)->last_token);
      header_end = elem(0)->span.end;
      body_from = skip + 1;
    } else if ((keyword == "procedure" || keyword == "globalProc") && elem(0) &&
               is_group_form(*elem(0))) {
      // (procedure (foo a b) ...)
      std::vector<std::string> ids = params_in_range(elem(0)->first_token, elem(0)->last_token);
      if (ids.empty()) return std::nullopt;
      name = ids.front();
      params.assign(ids.begin() + 1, ids.end());
      header_end = elem(0)->span.end;
      body_from = skip + 1;
    } else {
      return std::nullopt;
    }
    if (name.empty()) return std::nullopt;

    Form f;
    f.kind = FormKind::ProcedureDef;
    f.name = std::move(name);
    f.params = std::move(params);
    f.span = span;
    f.first_token = first_token;
    f.last_token = last_token;
    f.header_end = header_end;
    f.children.assign(std::make_move_iterator(elements.begin() + static_cast<long>(body_from)),
                      std::make_move_iterator(elements.end()));
    if (f.children.empty()) {
      f.body_span = Span{header_end, header_end};
    } else {
      f.body_span = Span{f.children.front().span.start, f.children.back().span.end};
    }
    return f;
  }

  // Parameter names in a header token range: identifiers one delimiter deep,
  // plus the first identifier of defaulted sub-lists. @-markers are skipped.
  std::vector<std::string> params_in_range(std::size_t begin, std::size_t end) const {
    std::vector<std::string> out;
    int depth = 0;
    bool want_first = false;
    for (std::size_t k = begin; k < end && k < toks_.size(); ++k) {
      const Token& t = toks_[k];
      if (t.kind == TokenKind::OpenDelim) {
        ++depth;
        if (depth == 2) want_first = true;
      } else if (t.kind == TokenKind::CloseDelim) {
        if (depth > 0) --depth;
        if (depth < 2) want_first = false;
      } else if (t.kind == TokenKind::Identifier && t.text[0] != '@') {
        if (depth == 1) {
          out.push_back(t.text);
        } else if (depth == 2 && want_first) {
          out.push_back(t.text);
          want_first = false;
        }
      }
    }
    return out;
  }

  // Cell name for pcDefinePCell: the second string of the cell spec when
  // present (library then cell), otherwise the first, otherwise the callee.
  std::string pcell_name(const Form& spec) const {
    std::vector<std::string> strings;
    for (std::size_t k = spec.first_token; k < spec.last_token && k < toks_.size(); ++k) {
      if (toks_[k].kind == TokenKind::String && toks_[k].text.size() >= 2) {
        strings.push_back(toks_[k].text.substr(1, toks_[k].text.size() - 2));
      }
    }
    if (strings.size() >= 2) return strings[1];
    if (strings.size() == 1) return strings[0];
    return spec.name.value_or("");
  }

  std::string_view text_;
  const std::vector<Token>& toks_;
  const SyntaxConfig& cfg_;
  std::vector<ParseDiagnostic> diags_;
};

void walk_procedures(const std::vector<Form>& siblings, std::string_view text,
                     std::vector<ProcedureInfo>& out) {
  for (std::size_t k = 0; k < siblings.size(); ++k) {
    const Form& f = siblings[k];
    if (f.kind == FormKind::ProcedureDef) {
      ProcedureInfo info;
      info.name = f.name.value_or("");
      info.header_span = {f.span.start, f.header_end};
      info.body_span = f.body_span.value_or(Span{f.header_end, f.header_end});
      info.full_span = f.span;
      info.form = &f;
      if (k > 0 && siblings[k - 1].kind == FormKind::CommentBlock &&
          blank_lines_between(text, siblings[k - 1].span.end, f.span.start) <= 1) {
        info.preceding_comment = siblings[k - 1].span;
      }
      out.push_back(std::move(info));
    }
    walk_procedures(f.children, text, out);
  }
}

void walk_comment_blocks(const std::vector<Form>& siblings, std::string_view text,
                         std::vector<CommentBlockInfo>& out) {
  for (std::size_t k = 0; k < siblings.size(); ++k) {
    const Form& f = siblings[k];
    if (f.kind == FormKind::CommentBlock) {
      CommentBlockInfo info;
      info.comment_span = f.span;
      if (k + 1 < siblings.size()) {
        const Form& next = siblings[k + 1];
        if ((next.kind == FormKind::Statement || next.kind == FormKind::Construct) &&
            blank_lines_between(text, f.span.end, next.span.start) <= 1) {
          info.following_form = &next;
        }
      }
      out.push_back(info);
    }
    walk_comment_blocks(f.children, text, out);
  }
}

}  // namespace

bool SyntaxConfig::is_definition(std::string_view word) const {
  return list_contains(definition_keywords, std::string(word));
}

bool SyntaxConfig::is_construct(std::string_view word) const {
  return list_contains(construct_keywords, std::string(word));
}

bool SyntaxConfig::is_loop(std::string_view word) const {
  return list_contains(loop_keywords, std::string(word));
}

ParseResult parse(std::string_view text, const std::vector<Token>& tokens,
                  const SyntaxConfig& config) {
  return Parser(text, tokens, config).run();
}

std::vector<ProcedureInfo> extract_procedures(const std::vector<Form>& forms,
                                              std::string_view text) {
  std::vector<ProcedureInfo> out;
  walk_procedures(forms, text, out);
  return out;
}

std::vector<CommentBlockInfo> extract_comment_blocks(const std::vector<Form>& forms,
                                                     std::string_view text) {
  std::vector<CommentBlockInfo> out;
  walk_comment_blocks(forms, text, out);
  return out;
}

std::size_t blank_lines_between(std::string_view text, std::size_t from, std::size_t to) {
  std::size_t newlines = 0;
  for (std::size_t k = from; k < to && k < text.size(); ++k) {
    if (text[k] == '\n') ++newlines;
  }
  return newlines == 0 ? 0 : newlines - 1;
}

}  // namespace skillkit
