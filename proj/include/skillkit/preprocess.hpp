#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "skillkit/core.hpp"

namespace skillkit {

struct CleanConfig {
  // Case-insensitive per-line matches inside comments; a hit removes the
  // whole comment. Email addresses are removed on the same terms.
  std::vector<std::string> metadata_keywords{"copyright", "disclaimer", "liability",
                                             "author", "all rights reserved"};
  // Case-sensitive fragments that mark a comment as commented-out code.
  std::vector<std::string> commented_code_markers{"printf(",  "fprintf(", "sprintf(",
                                                  "procedure(", "defun(", "setq ",
                                                  "let("};
};

// Keeps the first occurrence per content hash, preserving input order.
std::vector<SourceFile> dedup_files(const std::vector<SourceFile>& files);

// Removes metadata comments, commented-out code, junk comments, and
// non-ASCII bytes. Code outside comments is preserved. Idempotent.
std::string clean_text(std::string_view text, const CleanConfig& config = {});

// Rewrites ';' line comments as '/* ... */' block comments, leaving code
// and existing block comments untouched. Idempotent.
std::string normalize_comments(std::string_view text);

// Removes all comments; a line left whitespace-only disappears entirely and
// trailing blanks before a removed comment are trimmed.
std::string strip_comments(std::string_view text);

}  // namespace skillkit
