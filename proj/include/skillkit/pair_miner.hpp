#pragma once

#include <string>
#include <vector>

#include "skillkit/core.hpp"
#include "skillkit/parser.hpp"

namespace skillkit {

struct MinerConfig {
  // A body longer than either bound also yields a split completion pair.
  std::size_t long_body_statements = 8;
  std::size_t long_body_tokens = 256;
  SyntaxConfig syntax;
};

// Extracts CF, FC, and CC pairs from one file, ordered by position. Texts
// are raw byte slices of the file; comment handling happens at export.
std::vector<Pair> mine_pairs(const SourceFile& file, const MinerConfig& config = {});

// Whitespace-normalized text a pair contributes when checking whether it is
// contained inside another pair.
std::string containment_needle(const Pair& pair);

// Sets top_level on each pair: true unless its needle appears inside some
// other pair's normalized input or output text.
void mark_top_level(std::vector<Pair>& pairs);

// mark_top_level followed by dropping the contained pairs.
std::vector<Pair> dedup_pairs(std::vector<Pair> pairs);

}  // namespace skillkit
