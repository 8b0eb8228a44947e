#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace skillkit {

using TokenId = std::int32_t;

// Byte-level BPE vocabulary. Ids are laid out as: pad, eos, unk, 100 mask
// sentinels, 256 byte symbols, then one id per merge in rank order. encode
// and decode are exact inverses on arbitrary byte strings because encoding
// only ever emits byte and merge ids.
class SubwordVocab {
 public:
  static constexpr TokenId kPadId = 0;
  static constexpr TokenId kEosId = 1;
  static constexpr TokenId kUnkId = 2;
  static constexpr TokenId kSentinelBase = 3;
  static constexpr int kSentinelCount = 100;
  static constexpr TokenId kByteBase = kSentinelBase + kSentinelCount;
  static constexpr TokenId kMergeBase = kByteBase + 256;

  TokenId pad_id() const { return kPadId; }
  TokenId eos_id() const { return kEosId; }
  TokenId unk_id() const { return kUnkId; }
  TokenId sentinel_id(int k) const;

  std::size_t size() const { return static_cast<std::size_t>(kMergeBase) + merges_.size(); }
  const std::vector<std::pair<std::string, std::string>>& merges() const { return merges_; }

  std::vector<TokenId> encode(std::string_view text) const;
  std::string decode(const std::vector<TokenId>& ids) const;
  std::string token_text(TokenId id) const;

  void save(const std::string& path) const;
  static SubwordVocab load(const std::string& path);

  // Greedy pair merging over whole-corpus piece counts. Stops at vocab_size
  // total ids or when no pair occurs at least twice. Ties break toward the
  // lexicographically smallest (left, right).
  static SubwordVocab train(const std::vector<std::string>& texts, std::size_t vocab_size);

  // Splits text into maximal runs of one class: identifier chars, digits,
  // whitespace, or other bytes. Merges never cross piece boundaries.
  static std::vector<std::string_view> pre_tokenize(std::string_view text);

 private:
  void add_merge(const std::string& left, const std::string& right);

  std::vector<std::pair<std::string, std::string>> merges_;
  std::vector<std::string> merged_text_;                           // rank -> symbol text
  std::map<std::pair<std::string, std::string>, std::size_t> rules_;  // pair -> rank
  std::map<std::string, TokenId> text_to_id_;                      // merged symbols only
};

}  // namespace skillkit
