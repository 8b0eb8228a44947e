#include "skillkit/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "skillkit/lexer.hpp"
#include "skillkit/lint.hpp"
#include "skillkit/pair_miner.hpp"
#include "skillkit/preprocess.hpp"
#include "skillkit/rng.hpp"
#include "skillkit/util.hpp"

namespace skillkit {
namespace {

std::map<std::string, std::size_t> pairs_per_file(const std::vector<Pair>& pairs) {
  std::map<std::string, std::size_t> counts;
  for (const Pair& p : pairs) ++counts[p.file_id];
  return counts;
}

LintReport ensure_lint(const SourceFile& file) {
  return file.lint ? *file.lint : lint_file(file.text);
}

}  // namespace

std::vector<SourceFile> filter_files(const std::vector<SourceFile>& files,
                                     const TrainingStrategy& strategy,
                                     const std::vector<Pair>& pairs,
                                     const FilterOptions& options) {
  const auto counts = pairs_per_file(pairs);
  std::vector<SourceFile> out;
  for (const SourceFile& file : files) {
    SourceFile copy = file;
    switch (strategy.file_filter) {
      case FileFilter::None:
        break;
      case FileFilter::LintPass: {
        copy.lint = ensure_lint(file);
        if (!copy.lint->passed()) continue;
        break;
      }
      case FileFilter::LintIqGe10: {
        copy.lint = ensure_lint(file);
        if (copy.lint->iq < 10) continue;
        break;
      }
      case FileFilter::HasPairs: {
        const auto it = counts.find(file.id);
        if (it == counts.end() || it->second < options.min_pairs) continue;
        break;
      }
    }
    if (!strategy.keep_comments) {
      copy.text = strip_comments(copy.text);
    }
    out.push_back(std::move(copy));
  }
  return out;
}

DatasetManifest make_splits(const std::vector<SourceFile>& files, const std::vector<Pair>& pairs,
                            std::uint64_t seed, const TrainingStrategy& strategy,
                            const SplitOptions& options) {
  DatasetManifest manifest;
  manifest.seed = seed;
  manifest.strategy = strategy;
  manifest.files = files;
  manifest.pairs = pairs;
  mark_top_level(manifest.pairs);

  const auto counts = pairs_per_file(manifest.pairs);
  std::vector<std::string> eligible;  // primary files with enough pairs
  for (const SourceFile& f : files) {
    const auto it = counts.find(f.id);
    const bool has_pairs = it != counts.end() && it->second >= options.min_pairs;
    if (f.origin == Origin::PrimaryProprietary && has_pairs) {
      eligible.push_back(f.id);
    } else {
      manifest.file_split[f.id] = Split::Train;
    }
  }
  std::sort(eligible.begin(), eligible.end());

  Rng rng(seed);
  std::set<std::string> val_files;
  std::set<std::string> test_files;

  if (eligible.empty()) {
    manifest.warnings.push_back(
        "no primary-origin files with pairs; validation and test splits are empty");
  } else {
    const auto top_cf_count = [&](const std::set<std::string>& members) {
      std::size_t n = 0;
      for (const Pair& p : manifest.pairs) {
        if (p.kind == PairKind::CF && p.top_level && members.count(p.file_id)) ++n;
      }
      return n;
    };
    bool balanced = false;
    std::size_t last_a = 0;
    std::size_t last_b = 0;
    for (std::size_t attempt = 0; attempt < options.max_attempts && !balanced; ++attempt) {
      rng.shuffle(eligible);
      std::set<std::string> a(eligible.begin(), eligible.begin() + eligible.size() / 2);
      std::set<std::string> b(eligible.begin() + eligible.size() / 2, eligible.end());
      last_a = top_cf_count(a);
      last_b = top_cf_count(b);
      const std::size_t hi = std::max(last_a, last_b);
      const std::size_t diff = last_a > last_b ? last_a - last_b : last_b - last_a;
      if (hi == 0 || static_cast<double>(diff) <= options.cf_tolerance * static_cast<double>(hi)) {
        balanced = true;
        val_files = std::move(a);
        test_files = std::move(b);
      }
    }
    if (!balanced) {
      throw SplitBalanceError(
          "no 50/50 repartition of " + std::to_string(eligible.size()) +
          " eligible files balanced top-level CF counts within " +
          std::to_string(options.cf_tolerance * 100) + "% after " +
          std::to_string(options.max_attempts) + " attempts (last counts " +
          std::to_string(last_a) + " vs " + std::to_string(last_b) + ")");
    }
    if (top_cf_count(val_files) == 0 && top_cf_count(test_files) == 0) {
      manifest.warnings.push_back("eligible files contain no top-level CF pairs");
    }
    for (const std::string& id : val_files) manifest.file_split[id] = Split::Val;
    for (const std::string& id : test_files) manifest.file_split[id] = Split::Test;
  }

  // Train files contribute every pair; val/test files contribute a selection
  // sized by their top-level CF count.
  for (const Pair& p : manifest.pairs) {
    const auto it = manifest.file_split.find(p.file_id);
    if (it != manifest.file_split.end() && it->second == Split::Train) {
      manifest.pair_split[p.id] = Split::Train;
    }
  }
  const auto select_split = [&](const std::set<std::string>& members, Split split) {
    std::vector<const Pair*> cf;
    std::vector<const Pair*> fc;
    std::vector<const Pair*> cc_top;
    std::vector<const Pair*> cc_rest;
    for (const Pair& p : manifest.pairs) {
      if (!members.count(p.file_id)) continue;
      if (p.kind == PairKind::CF && p.top_level) cf.push_back(&p);
      if (p.kind == PairKind::FC && p.top_level) fc.push_back(&p);
      if (p.kind == PairKind::CC && p.top_level) cc_top.push_back(&p);
      if (p.kind == PairKind::CC && !p.top_level) cc_rest.push_back(&p);
    }
    const std::size_t n = cf.size();
    for (const Pair* p : cf) manifest.pair_split[p->id] = split;

    std::vector<const Pair*> fc_pick = fc.size() > n ? rng.sample(fc, n) : fc;
    if (fc.size() < n) {
      manifest.warnings.push_back("split " + to_string(split) + ": only " +
                                  std::to_string(fc.size()) + " top-level FC pairs for target " +
                                  std::to_string(n));
    }
    for (const Pair* p : fc_pick) manifest.pair_split[p->id] = split;

    std::vector<const Pair*> cc_pick;
    if (cc_top.size() >= n) {
      cc_pick = cc_top.size() > n ? rng.sample(cc_top, n) : cc_top;
    } else {
      cc_pick = cc_top;
      const std::size_t need = n - cc_top.size();
      if (cc_rest.size() > need) {
        const auto fill = rng.sample(cc_rest, need);
        cc_pick.insert(cc_pick.end(), fill.begin(), fill.end());
      } else {
        cc_pick.insert(cc_pick.end(), cc_rest.begin(), cc_rest.end());
        if (cc_top.size() + cc_rest.size() < n) {
          manifest.warnings.push_back("split " + to_string(split) + ": only " +
                                      std::to_string(cc_top.size() + cc_rest.size()) +
                                      " CC pairs for target " + std::to_string(n));
        }
      }
    }
    for (const Pair* p : cc_pick) manifest.pair_split[p->id] = split;
  };
  if (!eligible.empty()) {
    select_split(val_files, Split::Val);
    select_split(test_files, Split::Test);
  }
  return manifest;
}

double truncated_geometric_q(double target_mean, std::size_t cap) {
  if (cap < 2) throw std::invalid_argument("truncated_geometric_q: cap must be at least 2");
  const double uniform_limit = (1.0 + static_cast<double>(cap)) / 2.0;
  if (!(target_mean > 1.0) || !(target_mean < uniform_limit)) {
    throw std::invalid_argument("truncated_geometric_q: target mean must lie in (1, (cap+1)/2)");
  }
  const auto truncated_mean = [cap](double q) {
    // sum k q^(k-1) normalized over k = 1..cap
    double weight = 0.0;
    double mean = 0.0;
    double power = 1.0;
    for (std::size_t k = 1; k <= cap; ++k) {
      weight += power;
      mean += static_cast<double>(k) * power;
      power *= q;
    }
    return mean / weight;
  };
  double lo = 0.0;
  double hi = 1.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (truncated_mean(mid) < target_mean) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

namespace {

// Cumulative distribution of span lengths 1..cap for inverse sampling.
std::vector<double> span_length_cdf(double q, std::size_t cap) {
  std::vector<double> weights(cap);
  double power = 1.0;
  double total = 0.0;
  for (std::size_t k = 0; k < cap; ++k) {
    weights[k] = power;
    total += power;
    power *= q;
  }
  std::vector<double> cdf(cap);
  double acc = 0.0;
  for (std::size_t k = 0; k < cap; ++k) {
    acc += weights[k] / total;
    cdf[k] = acc;
  }
  cdf[cap - 1] = 1.0;
  return cdf;
}

std::size_t draw_span_length(Rng& rng, const std::vector<double>& cdf) {
  const double u = rng.unit();
  for (std::size_t k = 0; k < cdf.size(); ++k) {
    if (u < cdf[k]) return k + 1;
  }
  return cdf.size();
}

}  // namespace

std::vector<MlmSample> build_mlm_samples(const std::vector<SourceFile>& files,
                                         const SubwordVocab& vocab, std::uint64_t seed,
                                         const MlmOptions& options) {
  if (options.chunk_tokens == 0) throw std::invalid_argument("chunk_tokens must be positive");

  std::vector<TokenId> stream;
  std::vector<std::pair<std::size_t, std::string>> file_starts;  // stream offset -> file id
  for (const SourceFile& f : files) {
    file_starts.emplace_back(stream.size(), f.id);
    const std::vector<TokenId> ids = vocab.encode(f.text);
    stream.insert(stream.end(), ids.begin(), ids.end());
    stream.push_back(vocab.eos_id());
  }

  const double q = truncated_geometric_q(options.mean_span_tokens, options.max_span_tokens);
  const std::vector<double> cdf = span_length_cdf(q, options.max_span_tokens);

  Rng rng(seed);
  std::vector<MlmSample> samples;
  std::size_t chunk_index = 0;
  for (std::size_t start = 0; start < stream.size(); start += options.chunk_tokens) {
    const std::size_t len = std::min(options.chunk_tokens, stream.size() - start);
    if (len < options.chunk_tokens && !options.keep_short_final) break;

    std::size_t num_spans = static_cast<std::size_t>(std::llround(
        options.mask_fraction * static_cast<double>(len) / options.mean_span_tokens));
    if (num_spans > static_cast<std::size_t>(SubwordVocab::kSentinelCount)) {
      throw std::invalid_argument("mask configuration needs more sentinels than available");
    }

    MlmSample sample;
    sample.chunk_index = chunk_index++;
    // files overlapping [start, start+len)
    for (std::size_t k = 0; k < file_starts.size(); ++k) {
      const std::size_t file_begin = file_starts[k].first;
      const std::size_t file_end =
          k + 1 < file_starts.size() ? file_starts[k + 1].first : stream.size();
      if (file_begin < start + len && file_end > start) {
        sample.file_ids.push_back(file_starts[k].second);
      }
    }

    if (num_spans == 0) {
      sample.corrupted_ids.assign(stream.begin() + static_cast<long>(start),
                                  stream.begin() + static_cast<long>(start + len));
      samples.push_back(std::move(sample));
      continue;
    }

    // span lengths, shrunk as a group if a short chunk cannot fit them
    std::vector<std::size_t> lengths;
    lengths.reserve(num_spans);
    for (std::size_t k = 0; k < num_spans; ++k) lengths.push_back(draw_span_length(rng, cdf));
    while (lengths.size() > 1 &&
           std::accumulate(lengths.begin(), lengths.end(), std::size_t{0}) + (lengths.size() - 1) >
               len) {
      lengths.pop_back();
    }
    std::size_t total_masked = std::accumulate(lengths.begin(), lengths.end(), std::size_t{0});
    if (total_masked + (lengths.size() - 1) > len) {
      sample.corrupted_ids.assign(stream.begin() + static_cast<long>(start),
                                  stream.begin() + static_cast<long>(start + len));
      samples.push_back(std::move(sample));
      continue;
    }

    // gap layout: interior gaps get one guaranteed token so spans never touch
    const std::size_t spans = lengths.size();
    const std::size_t free_slack = len - total_masked - (spans - 1);
    std::vector<std::size_t> cuts(spans);
    for (std::size_t k = 0; k < spans; ++k) {
      cuts[k] = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(free_slack) + 1));
    }
    std::sort(cuts.begin(), cuts.end());

    std::vector<std::size_t> starts(spans);
    std::size_t pos = cuts[0];
    for (std::size_t k = 0; k < spans; ++k) {
      if (k > 0) pos += 1 + (cuts[k] - cuts[k - 1]);
      starts[k] = pos;
      pos += lengths[k];
    }

    std::size_t cursor = 0;
    for (std::size_t k = 0; k < spans; ++k) {
      while (cursor < starts[k]) {
        sample.corrupted_ids.push_back(stream[start + cursor]);
        ++cursor;
      }
      const TokenId sentinel = vocab.sentinel_id(static_cast<int>(k));
      sample.corrupted_ids.push_back(sentinel);
      sample.target_ids.push_back(sentinel);
      for (std::size_t t = 0; t < lengths[k]; ++t) {
        sample.target_ids.push_back(stream[start + cursor]);
        ++cursor;
      }
    }
    while (cursor < len) {
      sample.corrupted_ids.push_back(stream[start + cursor]);
      ++cursor;
    }
    samples.push_back(std::move(sample));
  }
  return samples;
}

std::vector<TokenId> mlm_reconstruct(const MlmSample& sample) {
  const auto is_sentinel = [](TokenId id) {
    return id >= SubwordVocab::kSentinelBase && id < SubwordVocab::kByteBase;
  };
  std::map<TokenId, std::vector<TokenId>> segments;
  TokenId current = -1;
  for (TokenId id : sample.target_ids) {
    if (is_sentinel(id)) {
      current = id;
      segments[current];
    } else if (current >= 0) {
      segments[current].push_back(id);
    }
  }
  std::vector<TokenId> out;
  for (TokenId id : sample.corrupted_ids) {
    if (is_sentinel(id)) {
      const auto it = segments.find(id);
      if (it == segments.end()) {
        throw std::invalid_argument("corrupted stream references a sentinel with no target");
      }
      out.insert(out.end(), it->second.begin(), it->second.end());
    } else {
      out.push_back(id);
    }
  }
  return out;
}

namespace {

// Keeps comments while a shared word budget lasts: a comment that fits is
// left verbatim, the first overflowing one is truncated, the rest vanish.
std::string budget_comments(std::string_view input, std::size_t max_words) {
  std::string out;
  std::size_t last = 0;
  std::size_t budget = max_words;
  for (const Token& t : lex(input)) {
    if (!is_comment(t)) continue;
    const std::string body = comment_body(t.text);
    std::vector<std::string> words;
    std::string word;
    for (char c : body) {
      if (is_space_byte(c)) {
        if (!word.empty()) words.push_back(std::move(word));
        word.clear();
      } else {
        word.push_back(c);
      }
    }
    if (!word.empty()) words.push_back(std::move(word));

    if (words.size() <= budget) {
      budget -= words.size();
      continue;  // comment stays untouched
    }
    out.append(input.substr(last, t.span.start - last));
    if (budget > 0) {
      out.append("/*");
      for (std::size_t k = 0; k < budget; ++k) {
        out.push_back(' ');
        out.append(words[k]);
      }
      out.append(" */");
      budget = 0;
    }
    last = t.span.end;
  }
  out.append(input.substr(last));
  return out;
}

}  // namespace

std::vector<Seq2SeqSample> build_seq2seq_samples(const std::vector<Pair>& pairs,
                                                 const SubwordVocab& vocab,
                                                 const Seq2SeqOptions& options) {
  std::vector<Seq2SeqSample> samples;
  samples.reserve(pairs.size());
  for (const Pair& pair : pairs) {
    Seq2SeqSample s;
    s.pair_id = pair.id;
    s.kind = pair.kind;
    s.input_text = budget_comments(pair.input_text, options.max_comment_words);
    s.output_text = strip_comments(pair.output_text);
    s.input_ids = vocab.encode(s.input_text);
    if (s.input_ids.size() > options.max_input_tokens) {
      s.input_ids.resize(options.max_input_tokens);
    }
    s.output_ids = vocab.encode(s.output_text);
    if (s.output_ids.size() > options.max_output_tokens) {
      s.output_ids.resize(options.max_output_tokens);
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

}  // namespace skillkit
