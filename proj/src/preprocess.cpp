#include "skillkit/preprocess.hpp"

#include <cctype>
#include <regex>
#include <unordered_set>

#include "skillkit/lexer.hpp"
#include "skillkit/util.hpp"

namespace skillkit {
namespace {

const std::regex& email_regex() {
  static const std::regex re(R"([A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,})");
  return re;
}

bool should_remove_comment(const std::string& comment_text, const CleanConfig& cfg) {
  const std::string body = comment_body(comment_text);

  bool has_alnum = false;
  for (char c : body) {
    if (std::isalnum(static_cast<unsigned char>(c)) != 0) {
      has_alnum = true;
      break;
    }
  }
  if (!has_alnum) return true;  // whitespace or special characters only

  for (std::string_view line : split_lines(body)) {
    for (const std::string& keyword : cfg.metadata_keywords) {
      if (contains_ci(line, keyword)) return true;
    }
    if (std::regex_search(line.begin(), line.end(), email_regex())) return true;
  }

  for (const std::string& marker : cfg.commented_code_markers) {
    if (body.find(marker) != std::string::npos) return true;
  }
  return false;
}

// Removes masked bytes. A line whose unmasked remainder is whitespace-only
// disappears entirely; otherwise trailing blanks left by a removal are
// trimmed. When drop_non_ascii is set, bytes >= 0x80 are dropped as well.
std::string apply_removal(std::string_view text, std::vector<bool>& mask, bool drop_non_ascii) {
  std::size_t line_start = 0;
  while (line_start < text.size()) {
    std::size_t line_end = text.find('\n', line_start);
    const bool has_newline = line_end != std::string_view::npos;
    if (!has_newline) line_end = text.size();

    bool touched = false;
    bool all_ws = true;
    for (std::size_t k = line_start; k < line_end; ++k) {
      if (mask[k]) {
        touched = true;
      } else if (!is_space_byte(text[k])) {
        all_ws = false;
      }
    }
    if (touched) {
      if (all_ws) {
        for (std::size_t k = line_start; k < line_end; ++k) mask[k] = true;
        if (has_newline) mask[line_end] = true;
      } else {
        for (std::size_t k = line_end; k > line_start;) {
          --k;
          if (mask[k]) continue;
          if (is_space_byte(text[k])) {
            mask[k] = true;
          } else {
            break;
          }
        }
      }
    }
    line_start = has_newline ? line_end + 1 : text.size();
  }

  std::string out;
  out.reserve(text.size());
  for (std::size_t k = 0; k < text.size(); ++k) {
    if (mask[k]) continue;
    if (drop_non_ascii && static_cast<unsigned char>(text[k]) >= 0x80) continue;
    out.push_back(text[k]);
  }
  return out;
}

std::string clean_once(std::string_view text, const CleanConfig& cfg) {
  std::vector<bool> mask(text.size(), false);
  for (const Token& t : lex(text)) {
    if (!is_comment(t)) continue;
    if (should_remove_comment(t.text, cfg)) {
      for (std::size_t k = t.span.start; k < t.span.end; ++k) mask[k] = true;
    }
  }
  return apply_removal(text, mask, /*drop_non_ascii=*/true);
}

}  // namespace

std::vector<SourceFile> dedup_files(const std::vector<SourceFile>& files) {
  std::vector<SourceFile> out;
  std::unordered_set<std::string> seen;
  for (const SourceFile& f : files) {
    const std::string key = content_hash(f.text);
    if (seen.insert(key).second) out.push_back(f);
  }
  return out;
}

std::string clean_text(std::string_view text, const CleanConfig& config) {
  // Removing non-ASCII bytes can expose new keyword matches, so iterate to
  // a fixed point; two rounds suffice in practice.
  std::string cur(text);
  for (int round = 0; round < 8; ++round) {
    std::string next = clean_once(cur, config);
    if (next == cur) break;
    cur = std::move(next);
  }
  return cur;
}

std::string normalize_comments(std::string_view text) {
  std::string out;
  out.reserve(text.size() + 32);
  std::size_t last = 0;
  for (const Token& t : lex(text)) {
    if (t.kind != TokenKind::LineComment) continue;
    out.append(text.substr(last, t.span.start - last));
    std::string body = comment_body(t.text);
    std::string suffix;
    if (!body.empty() && body.back() == '\r') {
      suffix = "\r";
      body.pop_back();
    }
    if (body.find("*/") != std::string::npos) {
      // cannot be wrapped without ending the block comment early
      out.append(t.text);
    } else {
      out.append("/*");
      out.append(body);
      out.append(" */");
      out.append(suffix);
    }
    last = t.span.end;
  }
  out.append(text.substr(last));
  return out;
}

std::string strip_comments(std::string_view text) {
  std::vector<bool> mask(text.size(), false);
  for (const Token& t : lex(text)) {
    if (!is_comment(t)) continue;
    for (std::size_t k = t.span.start; k < t.span.end; ++k) mask[k] = true;
  }
  return apply_removal(text, mask, /*drop_non_ascii=*/false);
}

}  // namespace skillkit
