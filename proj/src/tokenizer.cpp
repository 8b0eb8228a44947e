#include "skillkit/tokenizer.hpp"

#include <cctype>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "skillkit/util.hpp"

namespace skillkit {
namespace {

int byte_class(unsigned char c) {
  if (std::isalpha(c) != 0 || c == '_') return 0;
  if (c >= '0' && c <= '9') return 1;
  if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f') return 2;
  return 3;
}

// Replaces every non-overlapping (left, right) adjacency, scanning left to
// right. Training and encoding share this so their outputs agree.
void apply_merge(std::vector<std::string>& syms, const std::string& left,
                 const std::string& right) {
  std::size_t w = 0;
  for (std::size_t r = 0; r < syms.size();) {
    if (r + 1 < syms.size() && syms[r] == left && syms[r + 1] == right) {
      syms[w] = left + right;
      ++w;
      r += 2;
    } else {
      if (w != r) syms[w] = std::move(syms[r]);
      ++w;
      r += 1;
    }
  }
  syms.resize(w);
}

std::string escape_symbol(const std::string& s) {
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned char c : s) {
    if (c == '\\') {
      out += "\\\\";
    } else if (c < 0x21 || c > 0x7e) {
      out += "\\x";
      out.push_back(hex[c >> 4]);
      out.push_back(hex[c & 0x0f]);
    } else {
      out.push_back(static_cast<char>(c));
    }
  }
  return out;
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::string unescape_symbol(std::string_view s) {
  std::string out;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (s[k] != '\\') {
      out.push_back(s[k]);
      continue;
    }
    if (k + 1 < s.size() && s[k + 1] == '\\') {
      out.push_back('\\');
      ++k;
    } else if (k + 3 < s.size() && s[k + 1] == 'x' && hex_value(s[k + 2]) >= 0 &&
               hex_value(s[k + 3]) >= 0) {
      out.push_back(static_cast<char>(hex_value(s[k + 2]) * 16 + hex_value(s[k + 3])));
      k += 3;
    } else {
      throw std::runtime_error("vocabulary file: bad escape in symbol");
    }
  }
  return out;
}

}  // namespace

TokenId SubwordVocab::sentinel_id(int k) const {
  if (k < 0 || k >= kSentinelCount) throw std::out_of_range("sentinel index out of range");
  return kSentinelBase + k;
}

std::vector<std::string_view> SubwordVocab::pre_tokenize(std::string_view text) {
  std::vector<std::string_view> pieces;
  std::size_t start = 0;
  while (start < text.size()) {
    const int cls = byte_class(static_cast<unsigned char>(text[start]));
    std::size_t end = start + 1;
    while (end < text.size() && byte_class(static_cast<unsigned char>(text[end])) == cls) ++end;
    pieces.push_back(text.substr(start, end - start));
    start = end;
  }
  return pieces;
}

void SubwordVocab::add_merge(const std::string& left, const std::string& right) {
  const TokenId id = static_cast<TokenId>(kMergeBase + merges_.size());
  merges_.emplace_back(left, right);
  merged_text_.push_back(left + right);
  rules_.emplace(std::make_pair(left, right), merges_.size() - 1);
  text_to_id_.emplace(merged_text_.back(), id);  // first rank wins on collisions
}

std::vector<TokenId> SubwordVocab::encode(std::string_view text) const {
  std::vector<TokenId> ids;
  ids.reserve(text.size() / 2 + 1);
  for (std::string_view piece : pre_tokenize(text)) {
    std::vector<std::string> syms;
    syms.reserve(piece.size());
    for (char c : piece) syms.emplace_back(1, c);
    while (syms.size() > 1) {
      std::size_t best_rank = std::numeric_limits<std::size_t>::max();
      for (std::size_t k = 0; k + 1 < syms.size(); ++k) {
        const auto it = rules_.find({syms[k], syms[k + 1]});
        if (it != rules_.end() && it->second < best_rank) best_rank = it->second;
      }
      if (best_rank == std::numeric_limits<std::size_t>::max()) break;
      // copies: apply_merge rewrites syms in place
      const std::string left = merges_[best_rank].first;
      const std::string right = merges_[best_rank].second;
      apply_merge(syms, left, right);
    }
    for (const std::string& sym : syms) {
      if (sym.size() == 1) {
        ids.push_back(kByteBase + static_cast<unsigned char>(sym[0]));
      } else {
        ids.push_back(text_to_id_.at(sym));
      }
    }
  }
  return ids;
}

std::string SubwordVocab::decode(const std::vector<TokenId>& ids) const {
  std::string out;
  for (TokenId id : ids) out += token_text(id);
  return out;
}

std::string SubwordVocab::token_text(TokenId id) const {
  if (id == kPadId) return "<pad>";
  if (id == kEosId) return "</s>";
  if (id == kUnkId) return "<unk>";
  if (id >= kSentinelBase && id < kByteBase) {
    return "<extra_id_" + std::to_string(id - kSentinelBase) + ">";
  }
  if (id >= kByteBase && id < kMergeBase) {
    return std::string(1, static_cast<char>(id - kByteBase));
  }
  const std::size_t rank = static_cast<std::size_t>(id) - kMergeBase;
  if (id < kMergeBase || rank >= merged_text_.size()) {
    throw std::out_of_range("token id " + std::to_string(id) + " is not in the vocabulary");
  }
  return merged_text_[rank];
}

void SubwordVocab::save(const std::string& path) const {
  std::ostringstream out;
  for (const auto& [left, right] : merges_) {
    out << escape_symbol(left) << ' ' << escape_symbol(right) << '\n';
  }
  out << "specials:\n";
  out << "pad <pad>\n";
  out << "eos </s>\n";
  out << "unk <unk>\n";
  out << "sentinels " << kSentinelCount << "\n";
  write_file(path, out.str());
}

SubwordVocab SubwordVocab::load(const std::string& path) {
  const std::string data = read_file(path);
  SubwordVocab vocab;
  bool in_specials = false;
  int specials_seen = 0;
  std::size_t line_no = 0;
  for (std::string_view line : split_lines(data)) {
    ++line_no;
    if (line.empty() && line_no > 1) continue;
    if (line == "specials:") {
      in_specials = true;
      continue;
    }
    const auto fail = [&](const std::string& why) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + why);
    };
    if (!in_specials) {
      const std::size_t space = line.find(' ');
      if (space == std::string_view::npos || space == 0 || space + 1 >= line.size()) {
        fail("expected '<left> <right>' merge entry");
      }
      const std::string left = unescape_symbol(line.substr(0, space));
      const std::string right = unescape_symbol(line.substr(space + 1));
      const auto known = [&](const std::string& sym) {
        return sym.size() == 1 || vocab.text_to_id_.count(sym) > 0;
      };
      if (left.empty() || right.empty() || !known(left) || !known(right)) {
        fail("merge references an unknown symbol");
      }
      vocab.add_merge(left, right);
      continue;
    }
    if (line == "pad <pad>" || line == "eos </s>" || line == "unk <unk>" ||
        line == "sentinels 100") {
      ++specials_seen;
      continue;
    }
    fail("unexpected specials entry '" + std::string(line) + "'");
  }
  if (!in_specials || specials_seen != 4) {
    throw std::runtime_error(path + ": vocabulary file is missing its specials block");
  }
  return vocab;
}

SubwordVocab SubwordVocab::train(const std::vector<std::string>& texts, std::size_t vocab_size) {
  if (vocab_size < static_cast<std::size_t>(kMergeBase)) {
    throw std::invalid_argument("vocab_size must be at least " + std::to_string(kMergeBase) +
                                " to cover specials and byte symbols");
  }
  std::map<std::string, long long> piece_counts;
  for (const std::string& text : texts) {
    for (std::string_view piece : pre_tokenize(text)) {
      ++piece_counts[std::string(piece)];
    }
  }
  struct TrainPiece {
    std::vector<std::string> syms;
    long long count;
  };
  std::vector<TrainPiece> pieces;
  pieces.reserve(piece_counts.size());
  for (const auto& [text, count] : piece_counts) {
    TrainPiece p;
    p.count = count;
    p.syms.reserve(text.size());
    for (char c : text) p.syms.emplace_back(1, c);
    pieces.push_back(std::move(p));
  }

  SubwordVocab vocab;
  while (vocab.size() < vocab_size) {
    std::map<std::pair<std::string, std::string>, long long> pair_counts;
    for (const TrainPiece& p : pieces) {
      for (std::size_t k = 0; k + 1 < p.syms.size(); ++k) {
        pair_counts[{p.syms[k], p.syms[k + 1]}] += p.count;
      }
    }
    long long best_count = 0;
    const std::pair<std::string, std::string>* best = nullptr;
    for (const auto& [pair, count] : pair_counts) {
      if (count > best_count) {  // map order makes ties pick the smallest pair
        best_count = count;
        best = &pair;
      }
    }
    if (best == nullptr || best_count < 2) break;
    vocab.add_merge(best->first, best->second);
    for (TrainPiece& p : pieces) apply_merge(p.syms, best->first, best->second);
  }
  return vocab;
}

}  // namespace skillkit
