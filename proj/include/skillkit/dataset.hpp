#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "skillkit/core.hpp"
#include "skillkit/manifest.hpp"
#include "skillkit/tokenizer.hpp"

namespace skillkit {

struct FilterOptions {
  std::size_t min_pairs = 1;  // threshold for the has-pairs filter
};

// Applies the strategy's file filter. Lint reports are computed on demand
// when missing and returned attached to the surviving files.
std::vector<SourceFile> filter_files(const std::vector<SourceFile>& files,
                                     const TrainingStrategy& strategy,
                                     const std::vector<Pair>& pairs,
                                     const FilterOptions& options = {});

struct SplitOptions {
  std::size_t max_attempts = 1000;
  double cf_tolerance = 0.05;  // |a-b| <= tolerance * max(a, b)
  std::size_t min_pairs = 1;   // eligibility threshold for val/test files
};

// Raised when no seeded repartition balances the CF counts within budget.
class SplitBalanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Splits primary-origin files with pairs 50/50 into val/test, rerolling the
// partition until top-level CF counts balance, then selects per-split pairs:
// all top-level CF (count n), FC downsampled to n, CC topped up to n with
// non-top-level pairs when needed. Everything else goes to train.
DatasetManifest make_splits(const std::vector<SourceFile>& files, const std::vector<Pair>& pairs,
                            std::uint64_t seed, const TrainingStrategy& strategy = {},
                            const SplitOptions& options = {});

struct MlmOptions {
  std::size_t chunk_tokens = 512;
  double mask_fraction = 0.15;
  double mean_span_tokens = 3.0;
  std::size_t max_span_tokens = 8;
  bool keep_short_final = false;  // drop the trailing partial chunk by default
};

struct MlmSample {
  std::vector<TokenId> corrupted_ids;
  std::vector<TokenId> target_ids;
  std::vector<std::string> file_ids;  // files contributing tokens to this chunk
  std::size_t chunk_index = 0;
};

// Span-corruption samples: files are tokenized, joined with EOS separators,
// chunked, and masked with non-adjacent sentinel spans whose lengths follow
// a geometric distribution truncated to [1, max_span_tokens].
std::vector<MlmSample> build_mlm_samples(const std::vector<SourceFile>& files,
                                         const SubwordVocab& vocab, std::uint64_t seed,
                                         const MlmOptions& options = {});

// Splices the masked spans back into the corrupted stream, recovering the
// original chunk.
std::vector<TokenId> mlm_reconstruct(const MlmSample& sample);

// Parameter q of a geometric length distribution truncated to [1, cap],
// chosen so the truncated mean equals target_mean. Bisection, arithmetic
// only, so the result is bit-stable across platforms.
double truncated_geometric_q(double target_mean, std::size_t cap);

struct Seq2SeqOptions {
  std::size_t max_input_tokens = 1024;
  std::size_t max_output_tokens = 512;
  std::size_t max_comment_words = 150;
};

struct Seq2SeqSample {
  std::string pair_id;
  PairKind kind = PairKind::CF;
  std::string input_text;   // comments beyond the word budget trimmed away
  std::string output_text;  // comments stripped
  std::vector<TokenId> input_ids;
  std::vector<TokenId> output_ids;
};

std::vector<Seq2SeqSample> build_seq2seq_samples(const std::vector<Pair>& pairs,
                                                 const SubwordVocab& vocab,
                                                 const Seq2SeqOptions& options = {});

}  // namespace skillkit
