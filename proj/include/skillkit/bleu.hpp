#pragma once

#include <map>
#include <string>
#include <vector>

#include "skillkit/core.hpp"
#include "skillkit/tokenizer.hpp"

namespace skillkit {

struct BleuOptions {
  bool brevity_penalty = true;
};

struct BleuScore {
  double value = 0.0;
  // True when the candidate was empty or too short to form the required
  // n-grams; the value is 0 in that case.
  bool degenerate = false;
};

// Geometric mean of clipped 1..4-gram precisions against a single
// reference, without smoothing: any zero precision gives 0. The brevity
// penalty exp(1 - |ref|/|cand|) applies when the candidate is shorter.
BleuScore bleu(const std::vector<TokenId>& candidate, const std::vector<TokenId>& reference,
               const BleuOptions& options = {});

// Single-order variant: clipped n-gram precision for one n in [1, 4].
BleuScore bleu_n(const std::vector<TokenId>& candidate, const std::vector<TokenId>& reference,
                 int n, const BleuOptions& options = {});

struct CorpusBleuResult {
  double mean = 0.0;  // arithmetic mean over scored pairs
  std::vector<std::pair<std::string, double>> per_pair;
  std::vector<std::string> missing;  // pair ids with no prediction
};

// Scores each pair's prediction against its reference output, tokenizing
// both with the given vocabulary.
CorpusBleuResult corpus_bleu(const std::vector<Pair>& pairs,
                             const std::map<std::string, std::string>& predictions,
                             const SubwordVocab& vocab, const BleuOptions& options = {});

}  // namespace skillkit
