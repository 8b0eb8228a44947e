#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace skillkit {

// Byte range [start, end) into the owning text.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - start; }
  bool empty() const { return start == end; }
  bool contains(const Span& other) const {
    return start <= other.start && other.end <= end;
  }
  friend bool operator==(const Span&, const Span&) = default;
};

// Provenance tier of a source file. Only primary-proprietary files are
// eligible for the validation and test splits.
enum class Origin {
  PrimaryProprietary,
  SecondaryProprietary,
  RepoSearch,
  CodeSearch,
};

// CF: comment plus definition header -> body.
// CC: comment -> following statement or construct.
// FC: definition header -> body.
enum class PairKind { CF, CC, FC };

enum class Split { Train, Val, Test };

enum class FileFilter { None, LintPass, LintIqGe10, HasPairs };

enum class LintGrade { Pass, Fail };

struct LintFinding {
  std::string rule_id;
  Span span;
  int deduction = 0;
  std::string message;
};

// grade fails only on syntactic-error findings; iq = max(0, 100 - deductions).
struct LintReport {
  LintGrade grade = LintGrade::Pass;
  int iq = 100;
  std::vector<LintFinding> findings;

  bool passed() const { return grade == LintGrade::Pass; }
};

struct SourceFile {
  std::string id;  // content hash of text
  Origin origin = Origin::CodeSearch;
  std::string path;
  std::string text;
  std::optional<LintReport> lint;
};

// One supervised sample mined from a file. Spans index into the owning
// file's text; the input region always starts before the output region.
struct Pair {
  std::string id;
  std::string file_id;
  PairKind kind = PairKind::CF;
  Span input_span;
  Span output_span;
  std::string input_text;
  std::string output_text;
  bool top_level = false;
  bool split_completion = false;  // second half of a long body, split for FC
};

struct TrainingStrategy {
  bool self_supervised = true;
  FileFilter file_filter = FileFilter::None;
  bool keep_comments = true;
  bool supervised = true;
  bool deduplicated = true;
};

// SHA-256 hex digest of the exact byte sequence.
std::string content_hash(std::string_view text);

// Builds a SourceFile whose id is the content hash of text.
SourceFile make_source_file(Origin origin, std::string path, std::string text);

// Deterministic pair id derived from the owning file and span layout.
std::string pair_identity(const Pair& pair);

std::string to_string(Origin origin);
std::string to_string(PairKind kind);
std::string to_string(Split split);
std::string to_string(FileFilter filter);
std::string to_string(LintGrade grade);

Origin origin_from_string(std::string_view name);
PairKind pair_kind_from_string(std::string_view name);
Split split_from_string(std::string_view name);
FileFilter file_filter_from_string(std::string_view name);
LintGrade lint_grade_from_string(std::string_view name);

}  // namespace skillkit
