#include "skillkit/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace skillkit {
namespace {

using Ngram = std::vector<TokenId>;

std::map<Ngram, long long> ngram_counts(const std::vector<TokenId>& ids, int n) {
  std::map<Ngram, long long> counts;
  if (static_cast<std::size_t>(n) > ids.size()) return counts;
  for (std::size_t k = 0; k + n <= ids.size(); ++k) {
    ++counts[Ngram(ids.begin() + k, ids.begin() + k + n)];
  }
  return counts;
}

// Clipped precision: matches capped at the reference count, over the number
// of candidate n-grams. Returns {matches, total}.
std::pair<long long, long long> clipped_matches(const std::vector<TokenId>& candidate,
                                                const std::vector<TokenId>& reference, int n) {
  const auto cand = ngram_counts(candidate, n);
  const auto ref = ngram_counts(reference, n);
  long long matches = 0;
  long long total = 0;
  for (const auto& [gram, count] : cand) {
    total += count;
    const auto it = ref.find(gram);
    if (it != ref.end()) matches += std::min(count, it->second);
  }
  return {matches, total};
}

double brevity_penalty(std::size_t cand_len, std::size_t ref_len) {
  if (cand_len >= ref_len || cand_len == 0) return 1.0;
  return std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(cand_len));
}

}  // namespace

BleuScore bleu(const std::vector<TokenId>& candidate, const std::vector<TokenId>& reference,
               const BleuOptions& options) {
  if (candidate.empty() || candidate.size() < 4) {
    return {0.0, true};
  }
  double log_sum = 0.0;
  for (int n = 1; n <= 4; ++n) {
    const auto [matches, total] = clipped_matches(candidate, reference, n);
    if (matches == 0 || total == 0) return {0.0, false};
    log_sum += std::log(static_cast<double>(matches) / static_cast<double>(total));
  }
  double score = std::exp(log_sum / 4.0);
  if (options.brevity_penalty) score *= brevity_penalty(candidate.size(), reference.size());
  return {score, false};
}

BleuScore bleu_n(const std::vector<TokenId>& candidate, const std::vector<TokenId>& reference,
                 int n, const BleuOptions& options) {
  if (n < 1 || n > 4) throw std::invalid_argument("bleu_n: n must be in [1, 4]");
  if (candidate.size() < static_cast<std::size_t>(n)) {
    return {0.0, true};
  }
  const auto [matches, total] = clipped_matches(candidate, reference, n);
  if (matches == 0 || total == 0) return {0.0, false};
  double score = static_cast<double>(matches) / static_cast<double>(total);
  if (options.brevity_penalty) score *= brevity_penalty(candidate.size(), reference.size());
  return {score, false};
}

CorpusBleuResult corpus_bleu(const std::vector<Pair>& pairs,
                             const std::map<std::string, std::string>& predictions,
                             const SubwordVocab& vocab, const BleuOptions& options) {
  CorpusBleuResult result;
  double sum = 0.0;
  for (const Pair& pair : pairs) {
    const auto it = predictions.find(pair.id);
    if (it == predictions.end()) {
      result.missing.push_back(pair.id);
      continue;
    }
    const BleuScore score =
        bleu(vocab.encode(it->second), vocab.encode(pair.output_text), options);
    result.per_pair.emplace_back(pair.id, score.value);
    sum += score.value;
  }
  if (!result.per_pair.empty()) sum /= static_cast<double>(result.per_pair.size());
  result.mean = result.per_pair.empty() ? 0.0 : sum;
  return result;
}

}  // namespace skillkit
