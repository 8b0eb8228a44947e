#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "skillkit/lint.hpp"
#include "skillkit/pair_miner.hpp"
#include "skillkit/pipeline.hpp"
#include "skillkit/util.hpp"

using namespace skillkit;
namespace fs = std::filesystem;

namespace {

bool has_diag(const std::vector<std::string>& diags, const std::string& needle) {
  return std::any_of(diags.begin(), diags.end(), [&](const std::string& d) {
    return d.find(needle) != std::string::npos;
  });
}

}  // namespace

TEST_CASE("a minimal config is valid and fills in defaults") {
  const std::string doc = R"({"input_dir": "in", "out_dir": "out"})";
  CHECK(validate_pipeline_config(doc).empty());

  const PipelineConfig config = parse_pipeline_config(doc);
  CHECK(config.seed == 0);
  CHECK(config.origin == Origin::PrimaryProprietary);
  CHECK(config.vocab_size == 8000);
  CHECK(config.min_pairs == 1);
  CHECK(config.mlm.chunk_tokens == 512);
  CHECK(config.split.min_pairs == 1);
}

TEST_CASE("config validation reports every problem with its location") {
  const auto diags = validate_pipeline_config(R"({
    "bogus": 1,
    "seed": "seven",
    "vocab_size": 100,
    "origin": "weird",
    "strategy": {"file_filter": "nope", "mystery": true},
    "mlm": {"mask_fraction": 1.5},
    "seq2seq": {"max_input_tokens": 4},
    "split": {"cf_tolerance": -0.1}
  })");

  CHECK(has_diag(diags, "unknown key 'bogus'"));
  CHECK(has_diag(diags, "seed: expected a non-negative integer"));
  CHECK(has_diag(diags, "vocab_size: must be at least 359"));
  CHECK(has_diag(diags, "origin: unknown value 'weird'"));
  CHECK(has_diag(diags, "strategy.file_filter: unknown value 'nope'"));
  CHECK(has_diag(diags, "strategy: unknown key 'mystery'"));
  CHECK(has_diag(diags, "mlm.mask_fraction: must lie strictly between 0 and 1"));
  CHECK(has_diag(diags, "seq2seq.max_input_tokens: must be at least 8"));
  CHECK(has_diag(diags, "split.cf_tolerance: must be non-negative"));
  CHECK(has_diag(diags, "input_dir: required"));
  CHECK(has_diag(diags, "out_dir: required"));
}

TEST_CASE("mlm span mean must stay below the truncation cap") {
  const auto diags = validate_pipeline_config(
      R"({"input_dir": "in", "out_dir": "out", "mlm": {"mean_span_tokens": 9.0}})");
  CHECK(has_diag(diags, "mlm.mean_span_tokens: must lie in (1, (max_span_tokens + 1) / 2)"));
}

TEST_CASE("parse_pipeline_config throws with the collected diagnostics") {
  CHECK(validate_pipeline_config("{nope") ==
        std::vector<std::string>{"config is not valid JSON"});
  CHECK_THROWS_AS(parse_pipeline_config("{nope"), std::invalid_argument);
  try {
    parse_pipeline_config(R"({"vocab_size": 100})");
    CHECK(false);
  } catch (const std::invalid_argument& e) {
    const std::string message = e.what();
    CHECK(message.find("vocab_size") != std::string::npos);
    CHECK(message.find("input_dir: required") != std::string::npos);
  }
}

TEST_CASE("min_pairs feeds the split eligibility threshold") {
  const PipelineConfig config =
      parse_pipeline_config(R"({"input_dir": "in", "out_dir": "out", "min_pairs": 3})");
  CHECK(config.min_pairs == 3);
  CHECK(config.split.min_pairs == 3);
}

TEST_CASE("ingest scans in path order and drops byte-identical duplicates") {
  const std::string dir = "ingest_tmp";
  fs::remove_all(dir);
  fs::create_directories(dir + "/sub");
  write_file(dir + "/a.il", "x = 1\n");
  write_file(dir + "/dup.il", "x = 1\n");  // identical bytes, later path
  write_file(dir + "/sub/b.ils", "y = 2\n");
  write_file(dir + "/skip.txt", "not skill\n");

  std::size_t scanned = 0;
  const std::vector<SourceFile> files =
      ingest_directory(dir, Origin::SecondaryProprietary, &scanned);
  CHECK(scanned == 3);
  REQUIRE(files.size() == 2);
  CHECK(files[0].path == "a.il");
  CHECK(files[1].path == "sub/b.ils");
  CHECK(files[0].origin == Origin::SecondaryProprietary);

  CHECK_THROWS_AS(ingest_directory("no_such_dir_anywhere", Origin::PrimaryProprietary),
                  std::runtime_error);
  fs::remove_all(dir);
}

TEST_CASE("corpus and pair lists survive a save and load") {
  SourceFile linted = make_source_file(Origin::PrimaryProprietary, "l.il", "(a\n");
  linted.lint = lint_file(linted.text);
  const SourceFile plain =
      make_source_file(Origin::CodeSearch, "p.il",
                       "/* Doubles a value. */\nprocedure(dup2(v)\n  v * 2\n)\n");

  const std::string path = "corpus_roundtrip.json";
  save_corpus({linted, plain}, path);
  const std::vector<SourceFile> loaded = load_corpus(path);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].id == linted.id);
  CHECK(loaded[0].origin == Origin::PrimaryProprietary);
  CHECK(loaded[0].text == linted.text);
  REQUIRE(loaded[0].lint.has_value());
  CHECK(loaded[0].lint->grade == LintGrade::Fail);
  CHECK(loaded[0].lint->iq == linted.lint->iq);
  REQUIRE(loaded[0].lint->findings.size() == linted.lint->findings.size());
  CHECK(loaded[0].lint->findings[0].rule_id == linted.lint->findings[0].rule_id);
  CHECK_FALSE(loaded[1].lint.has_value());
  std::remove(path.c_str());

  std::vector<Pair> pairs = mine_pairs(plain);
  mark_top_level(pairs);
  REQUIRE_FALSE(pairs.empty());
  const std::string pair_path = "pairs_roundtrip.json";
  save_pair_list(pairs, pair_path);
  const std::vector<Pair> reloaded = load_pair_list(pair_path);
  REQUIRE(reloaded.size() == pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    CHECK(reloaded[k].id == pairs[k].id);
    CHECK(reloaded[k].file_id == pairs[k].file_id);
    CHECK(reloaded[k].kind == pairs[k].kind);
    CHECK(reloaded[k].input_span == pairs[k].input_span);
    CHECK(reloaded[k].output_span == pairs[k].output_span);
    CHECK(reloaded[k].input_text == pairs[k].input_text);
    CHECK(reloaded[k].output_text == pairs[k].output_text);
    CHECK(reloaded[k].top_level == pairs[k].top_level);
    CHECK(reloaded[k].split_completion == pairs[k].split_completion);
  }
  std::remove(pair_path.c_str());
}

namespace {

// Four pair-rich files (one CF, one FC, one CC each) plus two pairless files
// that anchor the train split and feed the tokenizer.
void write_pipeline_corpus(const std::string& dir) {
  fs::create_directories(dir);
  const char* tags[] = {"Alpha", "Beta", "Gamma", "Delta"};
  for (const char* tag : tags) {
    const std::string name = std::string(tag);
    std::string text;
    text += "/* Build the widget for " + name + ". */\n";
    text += "procedure(mk" + name + "(x)\n  x + 1\n)\n";
    text += "procedure(run" + name + "(y)\n  y * 2\n)\n";
    text += "; prepare the " + name + " table\n";
    text += "setq(tbl" + name + " list(1 2 3))\n";
    std::string lower = name;
    lower[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(lower[0])));
    write_file(dir + "/" + lower + ".il", text);
  }
  write_file(dir + "/plain_one.il", "x = 1\ny = 2\nz = x + y\n");
  write_file(dir + "/plain_two.il", "total = 0\ncount = 4\n");
}

PipelineConfig pipeline_config(const std::string& in, const std::string& out,
                               std::uint64_t seed) {
  PipelineConfig config;
  config.input_dir = in;
  config.out_dir = out;
  config.seed = seed;
  config.vocab_size = 400;
  return config;
}

std::vector<std::string> stage_names(const PipelineResult& result) {
  std::vector<std::string> names;
  for (const StageOutcome& stage : result.stages) names.push_back(stage.name);
  return names;
}

}  // namespace

TEST_CASE("the pipeline runs end to end and reruns fully cached") {
  const std::string in = "pipe_in";
  const std::string out_a = "pipe_out_a";
  const std::string out_b = "pipe_out_b";
  fs::remove_all(in);
  fs::remove_all(out_a);
  fs::remove_all(out_b);
  write_pipeline_corpus(in);

  const PipelineConfig config = pipeline_config(in, out_a, 3);
  const PipelineResult first = run_pipeline(config);

  CHECK(stage_names(first) ==
        std::vector<std::string>{"ingest", "clean", "lint", "mine", "split", "filter",
                                 "tokenizer", "export-mlm", "export-seq2seq", "manifest"});
  CHECK(first.stages_run == 10);
  CHECK(first.stages_cached == 0);
  CHECK(first.files_scanned == 6);
  CHECK(first.files_kept == 6);
  CHECK(first.pairs_mined == 12);      // 3 pairs from each of the four rich files
  CHECK(first.pairs_top_level == 12);  // nothing nested in this corpus

  const DatasetManifest& manifest = first.manifest;
  CHECK(manifest.warnings.empty());
  CHECK(manifest.files.size() == 6);
  std::map<Split, int> file_counts;
  for (const auto& [id, split] : manifest.file_split) ++file_counts[split];
  CHECK(file_counts[Split::Train] == 2);  // the pairless files
  CHECK(file_counts[Split::Val] == 2);
  CHECK(file_counts[Split::Test] == 2);
  std::map<Split, int> pair_counts;
  for (const auto& [id, split] : manifest.pair_split) ++pair_counts[split];
  CHECK(pair_counts[Split::Train] == 0);
  CHECK(pair_counts[Split::Val] == 6);
  CHECK(pair_counts[Split::Test] == 6);
  CHECK(manifest.exports.size() == 5);  // vocab, mlm, and three seq2seq files

  for (const char* artifact :
       {"work/ingest.json", "work/clean.json", "work/lint.json", "work/pairs.json",
        "work/split.jsonl", "work/filter.json", "vocab.txt", "mlm.jsonl",
        "seq2seq.train.jsonl", "seq2seq.val.jsonl", "seq2seq.test.jsonl",
        "manifest.jsonl", "cache.json"}) {
    CAPTURE(artifact);
    CHECK(fs::exists(out_a + "/" + artifact));
  }

  // a rerun with the same config touches nothing
  const std::string manifest_bytes = read_file(out_a + "/manifest.jsonl");
  const PipelineResult second = run_pipeline(config);
  CHECK(second.stages_run == 0);
  CHECK(second.stages_cached == 10);
  for (const StageOutcome& stage : second.stages) {
    CAPTURE(stage.name);
    CHECK(stage.cached);
  }
  CHECK(read_file(out_a + "/manifest.jsonl") == manifest_bytes);
  CHECK(manifest_to_string(second.manifest) == manifest_to_string(first.manifest));

  // a fresh output directory reproduces the manifest byte for byte
  run_pipeline(pipeline_config(in, out_b, 3));
  CHECK(read_file(out_b + "/manifest.jsonl") == manifest_bytes);

  // changing the seed invalidates the split and everything downstream of it,
  // while the ingest-through-filter stages stay cached
  const PipelineResult reseeded = run_pipeline(pipeline_config(in, out_a, 4));
  CHECK(reseeded.stages_cached == 5);
  CHECK(reseeded.stages_run == 5);
  for (const StageOutcome& stage : reseeded.stages) {
    const bool upstream = stage.name == "ingest" || stage.name == "clean" ||
                          stage.name == "lint" || stage.name == "mine" ||
                          stage.name == "filter";
    CAPTURE(stage.name);
    CHECK(stage.cached == upstream);
  }
  CHECK(reseeded.manifest.seed == 4);

  fs::remove_all(in);
  fs::remove_all(out_a);
  fs::remove_all(out_b);
}
