#include "skillkit/pair_miner.hpp"

#include <algorithm>
#include <map>

#include "skillkit/lexer.hpp"
#include "skillkit/util.hpp"

namespace skillkit {
namespace {

// Suffix automaton over the concatenated haystack; answers "is s a
// substring" in O(|s|) after O(total) construction.
class SubstringIndex {
 public:
  explicit SubstringIndex(std::string_view text) {
    states_.reserve(2 * text.size() + 2);
    states_.push_back({});  // root
    last_ = 0;
    for (char c : text) extend(c);
  }

  bool contains(std::string_view s) const {
    int cur = 0;
    for (char c : s) {
      const auto& next = states_[static_cast<std::size_t>(cur)].next;
      const auto it = next.find(c);
      if (it == next.end()) return false;
      cur = it->second;
    }
    return true;
  }

 private:
  struct State {
    std::map<char, int> next;
    int link = -1;
    int len = 0;
  };

  void extend(char c) {
    const int cur = static_cast<int>(states_.size());
    states_.push_back({});
    states_[static_cast<std::size_t>(cur)].len = states_[static_cast<std::size_t>(last_)].len + 1;
    int p = last_;
    while (p != -1 && !states_[static_cast<std::size_t>(p)].next.count(c)) {
      states_[static_cast<std::size_t>(p)].next[c] = cur;
      p = states_[static_cast<std::size_t>(p)].link;
    }
    if (p == -1) {
      states_[static_cast<std::size_t>(cur)].link = 0;
    } else {
      const int q = states_[static_cast<std::size_t>(p)].next[c];
      if (states_[static_cast<std::size_t>(p)].len + 1 == states_[static_cast<std::size_t>(q)].len) {
        states_[static_cast<std::size_t>(cur)].link = q;
      } else {
        const int clone = static_cast<int>(states_.size());
        states_.push_back(states_[static_cast<std::size_t>(q)]);
        states_[static_cast<std::size_t>(clone)].len = states_[static_cast<std::size_t>(p)].len + 1;
        while (p != -1 && states_[static_cast<std::size_t>(p)].next[c] == q) {
          states_[static_cast<std::size_t>(p)].next[c] = clone;
          p = states_[static_cast<std::size_t>(p)].link;
        }
        states_[static_cast<std::size_t>(q)].link = clone;
        states_[static_cast<std::size_t>(cur)].link = clone;
      }
    }
    last_ = cur;
  }

  std::vector<State> states_;
  int last_ = 0;
};

std::size_t tokens_in_span(const std::vector<Token>& tokens, Span span) {
  std::size_t count = 0;
  for (const Token& t : tokens) {
    if (t.span.start >= span.start && t.span.end <= span.end) ++count;
  }
  return count;
}

// Non-comment statements and constructs directly in a procedure body.
std::vector<const Form*> body_statements(const Form& def) {
  std::vector<const Form*> out;
  for (const Form& child : def.children) {
    if (child.kind != FormKind::CommentBlock) out.push_back(&child);
  }
  return out;
}

Pair finish_pair(const SourceFile& file, PairKind kind, Span input, Span output,
                 bool split_completion = false) {
  Pair p;
  p.file_id = file.id;
  p.kind = kind;
  p.input_span = input;
  p.output_span = output;
  p.input_text = file.text.substr(input.start, input.size());
  p.output_text = file.text.substr(output.start, output.size());
  p.split_completion = split_completion;
  p.id = pair_identity(p);
  return p;
}

}  // namespace

std::vector<Pair> mine_pairs(const SourceFile& file, const MinerConfig& config) {
  const std::vector<Token> tokens = lex(file.text);
  const ParseResult parsed = parse(file.text, tokens, config.syntax);
  std::vector<Pair> pairs;

  for (const ProcedureInfo& proc : extract_procedures(parsed.forms, file.text)) {
    const std::vector<const Form*> body = body_statements(*proc.form);
    if (body.empty()) continue;  // nothing but comments is not a completion target
    // raw body region, edge comments included; export strips them later
    const Span output = proc.body_span;

    if (proc.preceding_comment) {
      const Span input{proc.preceding_comment->start, proc.header_span.end};
      pairs.push_back(finish_pair(file, PairKind::CF, input, output));
    } else {
      pairs.push_back(finish_pair(file, PairKind::FC, proc.header_span, output));
      const bool long_body = body.size() > config.long_body_statements ||
                             tokens_in_span(tokens, output) > config.long_body_tokens;
      if (long_body && body.size() >= 2) {
        // split at the statement boundary nearest the midpoint of the body
        const std::size_t mid = output.start + output.size() / 2;
        std::size_t best = 1;
        std::size_t best_dist = SIZE_MAX;
        for (std::size_t j = 1; j < body.size(); ++j) {
          const std::size_t at = body[j]->span.start;
          const std::size_t dist = at > mid ? at - mid : mid - at;
          if (dist < best_dist) {
            best_dist = dist;
            best = j;
          }
        }
        const Span half_input{proc.header_span.start, body[best - 1]->span.end};
        const Span half_output{body[best]->span.start, output.end};
        pairs.push_back(finish_pair(file, PairKind::FC, half_input, half_output, true));
      }
    }
  }

  for (const CommentBlockInfo& block : extract_comment_blocks(parsed.forms, file.text)) {
    if (block.following_form == nullptr) continue;
    pairs.push_back(
        finish_pair(file, PairKind::CC, block.comment_span, block.following_form->span));
  }

  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.input_span.start != b.input_span.start) return a.input_span.start < b.input_span.start;
    if (a.output_span.start != b.output_span.start)
      return a.output_span.start < b.output_span.start;
    return to_string(a.kind) < to_string(b.kind);
  });
  return pairs;
}

std::string containment_needle(const Pair& pair) {
  return normalize_whitespace(pair.input_text) + " " + normalize_whitespace(pair.output_text);
}

void mark_top_level(std::vector<Pair>& pairs) {
  // Haystack: every pair's normalized input and output, joined with a byte
  // that cannot occur in normalized text, so matches never span pieces.
  std::string haystack;
  for (const Pair& p : pairs) {
    haystack += normalize_whitespace(p.input_text);
    haystack.push_back('\x01');
    haystack += normalize_whitespace(p.output_text);
    haystack.push_back('\x01');
  }
  const SubstringIndex index(haystack);
  for (Pair& p : pairs) {
    p.top_level = !index.contains(containment_needle(p));
  }
}

std::vector<Pair> dedup_pairs(std::vector<Pair> pairs) {
  mark_top_level(pairs);
  std::vector<Pair> out;
  out.reserve(pairs.size());
  for (Pair& p : pairs) {
    if (p.top_level) out.push_back(std::move(p));
  }
  return out;
}

}  // namespace skillkit
