#include "doctest.h"

#include <cmath>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "skillkit/bleu.hpp"
#include "support/oracles.hpp"

using namespace skillkit;

namespace {

std::vector<TokenId> ids(std::initializer_list<int> xs) {
  return std::vector<TokenId>(xs.begin(), xs.end());
}

std::vector<TokenId> random_ids(std::mt19937& rng, std::size_t max_len, int alphabet) {
  std::uniform_int_distribution<std::size_t> len_dist(0, max_len);
  std::uniform_int_distribution<int> tok_dist(103, 103 + alphabet - 1);
  std::vector<TokenId> out(len_dist(rng));
  for (TokenId& t : out) t = tok_dist(rng);
  return out;
}

}  // namespace

TEST_SUITE("bleu") {

TEST_CASE("an identical sequence scores exactly one") {
  const auto seq = ids({10, 11, 12, 13, 14, 15});
  const BleuScore s = bleu(seq, seq);
  CHECK(s.value == 1.0);
  CHECK_FALSE(s.degenerate);
}

TEST_CASE("one substitution can erase every 4-gram match") {
  const BleuScore s = bleu(ids({1, 2, 3, 4, 5, 6}), ids({1, 2, 3, 9, 5, 6}));
  CHECK(s.value == 0.0);
  CHECK_FALSE(s.degenerate);
}

TEST_CASE("a clean prefix is discounted only by the brevity penalty") {
  const BleuScore s = bleu(ids({1, 2, 3, 4}), ids({1, 2, 3, 4, 5}));
  CHECK(std::abs(s.value - std::exp(-0.25)) < 1e-12);

  const BleuScore raw = bleu(ids({1, 2, 3, 4}), ids({1, 2, 3, 4, 5}), {false});
  CHECK(raw.value == 1.0);
}

TEST_CASE("short or empty candidates are degenerate") {
  CHECK(bleu({}, ids({1, 2, 3, 4})).degenerate);
  CHECK(bleu(ids({1, 2, 3}), ids({1, 2, 3})).degenerate);
  CHECK(bleu(ids({1, 2, 3}), ids({1, 2, 3})).value == 0.0);
}

TEST_CASE("an empty reference scores zero without being degenerate") {
  const BleuScore s = bleu(ids({1, 2, 3, 4}), {});
  CHECK(s.value == 0.0);
  CHECK_FALSE(s.degenerate);
}

TEST_CASE("bleu_n matches hand-counted bigram precision") {
  const BleuScore s = bleu_n(ids({1, 2, 3, 4, 5, 6}), ids({1, 2, 3, 9, 5, 6}), 2);
  CHECK(std::abs(s.value - 0.6) < 1e-15);  // ab bc ef of ab bc cd de ef
  CHECK_FALSE(s.degenerate);
}

TEST_CASE("bleu_n applies the brevity penalty and validates n") {
  const BleuScore s = bleu_n(ids({1, 2}), ids({1, 2, 3}), 2);
  CHECK(std::abs(s.value - std::exp(-0.5)) < 1e-12);

  CHECK(bleu_n(ids({1, 2, 3}), ids({1, 2, 3}), 4).degenerate);
  CHECK_THROWS_AS(bleu_n(ids({1}), ids({1}), 0), std::invalid_argument);
  CHECK_THROWS_AS(bleu_n(ids({1}), ids({1}), 5), std::invalid_argument);
}

TEST_CASE("clipping caps repeated candidate n-grams at the reference count") {
  // candidate repeats one token; the reference holds only two of them
  const BleuScore s = bleu_n(ids({7, 7, 7, 7}), ids({7, 7, 1, 2}), 1);
  CHECK(std::abs(s.value - 0.5) < 1e-15);
}

TEST_CASE("the map-counting route agrees with position scanning") {
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const auto cand = random_ids(rng, 24, 5);
    const auto ref = random_ids(rng, 24, 5);
    CAPTURE(trial);
    const BleuScore fast = bleu(cand, ref);
    const double slow = testing::brute_bleu(cand, ref);
    CHECK(std::abs(fast.value - slow) < 1e-12);
    CHECK(fast.value >= 0.0);
    CHECK(fast.value <= 1.0);
    if (fast.degenerate) CHECK(fast.value == 0.0);
  }
}

TEST_CASE("corpus_bleu averages scored pairs and lists missing ones") {
  const SubwordVocab vocab = SubwordVocab::train({"abcdwxyz"}, 359);

  Pair good;
  good.id = "pair-good";
  good.output_text = "abcd";
  Pair bad;
  bad.id = "pair-bad";
  bad.output_text = "abcd";
  Pair absent;
  absent.id = "pair-absent";
  absent.output_text = "abcd";

  std::map<std::string, std::string> predictions{
      {"pair-good", "abcd"},  // echo: 1.0
      {"pair-bad", "wxyz"},   // shares nothing: 0.0
  };
  const CorpusBleuResult r = corpus_bleu({good, bad, absent}, predictions, vocab);
  REQUIRE(r.per_pair.size() == 2);
  CHECK(r.per_pair[0].first == "pair-good");
  CHECK(r.per_pair[0].second == 1.0);
  CHECK(r.per_pair[1].first == "pair-bad");
  CHECK(r.per_pair[1].second == 0.0);
  CHECK(r.mean == 0.5);
  REQUIRE(r.missing.size() == 1);
  CHECK(r.missing[0] == "pair-absent");
}

TEST_CASE("corpus_bleu with no scorable pairs reports a zero mean") {
  const SubwordVocab vocab = SubwordVocab::train({"abcd"}, 359);
  Pair lone;
  lone.id = "only";
  lone.output_text = "abcd";
  const CorpusBleuResult r = corpus_bleu({lone}, {}, vocab);
  CHECK(r.mean == 0.0);
  CHECK(r.per_pair.empty());
  REQUIRE(r.missing.size() == 1);
  CHECK(r.missing[0] == "only");
}

}  // TEST_SUITE
