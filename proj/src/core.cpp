#include "skillkit/core.hpp"

#include <openssl/evp.h>

#include <array>
#include <stdexcept>

namespace skillkit {

std::string content_hash(std::string_view text) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr) throw std::runtime_error("content_hash: EVP_MD_CTX_new failed");
  bool ok = EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) == 1 &&
            EVP_DigestUpdate(ctx, text.data(), text.size()) == 1 &&
            EVP_DigestFinal_ex(ctx, digest.data(), &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw std::runtime_error("content_hash: digest computation failed");

  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0x0f]);
  }
  return out;
}

SourceFile make_source_file(Origin origin, std::string path, std::string text) {
  SourceFile file;
  file.id = content_hash(text);
  file.origin = origin;
  file.path = std::move(path);
  file.text = std::move(text);
  return file;
}

std::string pair_identity(const Pair& pair) {
  std::string key = pair.file_id;
  key += '|';
  key += to_string(pair.kind);
  key += '|';
  key += std::to_string(pair.input_span.start);
  key += ':';
  key += std::to_string(pair.input_span.end);
  key += '|';
  key += std::to_string(pair.output_span.start);
  key += ':';
  key += std::to_string(pair.output_span.end);
  return content_hash(key);
}

std::string to_string(Origin origin) {
  switch (origin) {
    case Origin::PrimaryProprietary: return "primary-proprietary";
    case Origin::SecondaryProprietary: return "secondary-proprietary";
    case Origin::RepoSearch: return "repo-search";
    case Origin::CodeSearch: return "code-search";
  }
  throw std::invalid_argument("unknown Origin");
}

std::string to_string(PairKind kind) {
  switch (kind) {
    case PairKind::CF: return "CF";
    case PairKind::CC: return "CC";
    case PairKind::FC: return "FC";
  }
  throw std::invalid_argument("unknown PairKind");
}

std::string to_string(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  throw std::invalid_argument("unknown Split");
}

std::string to_string(FileFilter filter) {
  switch (filter) {
    case FileFilter::None: return "none";
    case FileFilter::LintPass: return "lint-pass";
    case FileFilter::LintIqGe10: return "lint-iq-ge-10";
    case FileFilter::HasPairs: return "has-pairs";
  }
  throw std::invalid_argument("unknown FileFilter");
}

std::string to_string(LintGrade grade) {
  switch (grade) {
    case LintGrade::Pass: return "pass";
    case LintGrade::Fail: return "fail";
  }
  throw std::invalid_argument("unknown LintGrade");
}

Origin origin_from_string(std::string_view name) {
  if (name == "primary-proprietary") return Origin::PrimaryProprietary;
  if (name == "secondary-proprietary") return Origin::SecondaryProprietary;
  if (name == "repo-search") return Origin::RepoSearch;
  if (name == "code-search") return Origin::CodeSearch;
  throw std::invalid_argument("unknown origin name: " + std::string(name));
}

PairKind pair_kind_from_string(std::string_view name) {
  if (name == "CF") return PairKind::CF;
  if (name == "CC") return PairKind::CC;
  if (name == "FC") return PairKind::FC;
  throw std::invalid_argument("unknown pair kind: " + std::string(name));
}

Split split_from_string(std::string_view name) {
  if (name == "train") return Split::Train;
  if (name == "val") return Split::Val;
  if (name == "test") return Split::Test;
  throw std::invalid_argument("unknown split name: " + std::string(name));
}

FileFilter file_filter_from_string(std::string_view name) {
  if (name == "none") return FileFilter::None;
  if (name == "lint-pass") return FileFilter::LintPass;
  if (name == "lint-iq-ge-10") return FileFilter::LintIqGe10;
  if (name == "has-pairs") return FileFilter::HasPairs;
  throw std::invalid_argument("unknown file filter: " + std::string(name));
}

LintGrade lint_grade_from_string(std::string_view name) {
  if (name == "pass") return LintGrade::Pass;
  if (name == "fail") return LintGrade::Fail;
  throw std::invalid_argument("unknown lint grade: " + std::string(name));
}

}  // namespace skillkit
