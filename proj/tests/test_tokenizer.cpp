#include "doctest.h"

#include <cstdio>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "skillkit/tokenizer.hpp"

using namespace skillkit;

namespace {

std::string random_ascii(std::mt19937& rng, std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len_dist(0, max_len);
  std::uniform_int_distribution<int> byte_dist(0x20, 0x7e);
  std::string s(len_dist(rng), '\0');
  for (char& c : s) c = static_cast<char>(byte_dist(rng));
  return s;
}

}  // namespace

TEST_SUITE("tokenizer") {

TEST_CASE("training rejects a vocabulary too small for the byte alphabet") {
  CHECK_THROWS_AS(SubwordVocab::train({"abc"}, 358), std::invalid_argument);
  CHECK_NOTHROW(SubwordVocab::train({"abc"}, 359));
}

TEST_CASE("the first merge learned from aaaa is the a-a pair") {
  const SubwordVocab v = SubwordVocab::train({"aaaa"}, 360);
  REQUIRE(v.merges().size() == 1);
  CHECK(v.merges()[0] == std::pair<std::string, std::string>{"a", "a"});
}

TEST_CASE("ties break toward the lexicographically smallest pair") {
  // "ab" and "cd" both occur twice with no overlap; "ab" must win rank 0.
  const SubwordVocab v = SubwordVocab::train({"ab cd ab cd"}, 360);
  REQUIRE(v.merges().size() == 1);
  CHECK(v.merges()[0] == std::pair<std::string, std::string>{"a", "b"});
}

TEST_CASE("training twice on the same corpus gives the same merges") {
  const std::vector<std::string> corpus{"procedure(foo(a) a + 1)", "foo(2)", "foo(3)"};
  const SubwordVocab a = SubwordVocab::train(corpus, 400);
  const SubwordVocab b = SubwordVocab::train(corpus, 400);
  CHECK(a.merges() == b.merges());
}

TEST_CASE("merges never cross byte-class boundaries") {
  // identifier chars and digits are different classes, so "x1" stays split
  const SubwordVocab v = SubwordVocab::train({"ax1 ax1 ax1 ax1"}, 400);
  for (const auto& [left, right] : v.merges()) {
    CHECK((left + right).find("x1") == std::string::npos);
  }
}

TEST_CASE("encode and decode invert each other on random ascii") {
  const SubwordVocab v =
      SubwordVocab::train({"procedure(run(a b) a + b)", "let((x 1)) x"}, 420);
  std::mt19937 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const std::string s = random_ascii(rng, 80);
    CAPTURE(s);
    CHECK(v.decode(v.encode(s)) == s);
  }
  CHECK(v.decode(v.encode("")) == "");
  CHECK(v.encode("").empty());
}

TEST_CASE("round trips survive bytes outside the training corpus") {
  const SubwordVocab v = SubwordVocab::train({"plain"}, 359);
  const std::string s = "caf\xC3\xA9\t\x01 zz";
  CHECK(v.decode(v.encode(s)) == s);
}

TEST_CASE("save and load preserve encodings") {
  const SubwordVocab v = SubwordVocab::train({"wire = route(wire net)"}, 420);
  const std::string path = "tokenizer_roundtrip.vocab.json";
  v.save(path);
  const SubwordVocab back = SubwordVocab::load(path);
  std::remove(path.c_str());

  CHECK(back.size() == v.size());
  CHECK(back.merges() == v.merges());
  const std::string sample = "wire = route(wire net) + 4";
  CHECK(back.encode(sample) == v.encode(sample));
}

TEST_CASE("a common keyword collapses to a single id with a large vocabulary") {
  std::vector<std::string> corpus;
  for (int k = 0; k < 12; ++k) {
    corpus.push_back("procedure(fn" + std::to_string(k) + "(a)\n  a\n)\n");
  }
  const SubwordVocab v = SubwordVocab::train(corpus, 4000);
  const std::vector<TokenId> ids = v.encode("procedure");
  REQUIRE(ids.size() == 1);
  CHECK(v.token_text(ids[0]) == "procedure");
}

TEST_CASE("sentinels are addressable and stay out of byte encodings") {
  const SubwordVocab v = SubwordVocab::train({"abc"}, 359);
  CHECK(v.sentinel_id(0) == 3);
  CHECK(v.sentinel_id(99) == 102);
  CHECK_THROWS_AS(v.sentinel_id(100), std::out_of_range);
  CHECK_THROWS_AS(v.sentinel_id(-1), std::out_of_range);
  for (TokenId id : v.encode("any text 123")) CHECK(id >= SubwordVocab::kByteBase);
}

TEST_CASE("decoding an id beyond the vocabulary throws") {
  const SubwordVocab v = SubwordVocab::train({"abc"}, 359);
  CHECK_THROWS_AS(v.decode({static_cast<TokenId>(v.size())}), std::out_of_range);
}

}  // TEST_SUITE
