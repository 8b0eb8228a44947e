#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "skillkit/bleu.hpp"
#include "skillkit/core.hpp"
#include "skillkit/dataset.hpp"
#include "skillkit/eval.hpp"
#include "skillkit/github_miner.hpp"
#include "skillkit/lint.hpp"
#include "skillkit/manifest.hpp"
#include "skillkit/pair_miner.hpp"
#include "skillkit/pipeline.hpp"
#include "skillkit/preprocess.hpp"
#include "skillkit/tokenizer.hpp"
#include "skillkit/util.hpp"

using namespace skillkit;
using nlohmann::json;

namespace {

json metric_means_json(const MetricMeans& means) {
  return json{{"bleu", means.bleu}, {"delta_iq", means.delta_iq}, {"count", means.count}};
}

json model_report_json(const ModelReport& model) {
  json per_kind = json::object();
  for (const auto& [kind, means] : model.per_kind) {
    per_kind[to_string(kind)] = metric_means_json(means);
  }
  json pairs = json::array();
  for (const auto& score : model.pair_scores) {
    pairs.push_back(json{{"pair_id", score.pair_id},
                         {"kind", to_string(score.kind)},
                         {"bleu", score.bleu},
                         {"bleu_n", score.bleu_n},
                         {"delta_iq", score.delta_iq}});
  }
  return json{{"model", model.model_name},
              {"overall", metric_means_json(model.overall)},
              {"per_kind", std::move(per_kind)},
              {"pairs", std::move(pairs)},
              {"missing_pair_ids", model.missing_pair_ids},
              {"unknown_pair_ids", model.unknown_pair_ids}};
}

EvalReport evaluate_from_paths(const std::string& manifest_path, const std::string& corpus_path,
                               const std::string& predictions_path, const std::string& vocab_path,
                               bool brevity_penalty) {
  DatasetManifest manifest = load_manifest(manifest_path);
  std::map<std::string, SourceFile> corpus;
  for (auto& file : load_corpus(corpus_path)) {
    corpus[file.id] = std::move(file);
  }
  SubwordVocab vocab = SubwordVocab::load(vocab_path);
  BleuOptions options;
  options.brevity_penalty = brevity_penalty;
  return evaluate_predictions(load_predictions(predictions_path), manifest, vocab, corpus,
                              options);
}

void write_mlm_samples(const std::vector<MlmSample>& samples, const std::string& path) {
  std::string lines;
  for (const auto& sample : samples) {
    lines += json{{"chunk_index", sample.chunk_index},
                  {"file_ids", sample.file_ids},
                  {"input_ids", sample.corrupted_ids},
                  {"target_ids", sample.target_ids}}
                 .dump() +
             "\n";
  }
  write_file(path, lines);
}

void write_seq2seq_samples(const std::vector<Seq2SeqSample>& samples, const std::string& path) {
  std::string lines;
  for (const auto& sample : samples) {
    lines += json{{"pair_id", sample.pair_id},
                  {"kind", to_string(sample.kind)},
                  {"input_text", sample.input_text},
                  {"output_text", sample.output_text},
                  {"input_ids", sample.input_ids},
                  {"output_ids", sample.output_ids}}
                 .dump() +
             "\n";
  }
  write_file(path, lines);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"skillkit: corpus construction and evaluation for SKILL code models"};
  app.require_subcommand(1);
  int exit_code = 0;

  // --- ingest ---
  auto* ingest_cmd = app.add_subcommand("ingest", "Scan a directory tree into a corpus file");
  std::string ingest_input, ingest_out, ingest_origin = "primary-proprietary";
  ingest_cmd->add_option("--input", ingest_input, "Directory to scan for .il/.ils files")
      ->required();
  ingest_cmd->add_option("--origin", ingest_origin, "Origin label for the ingested files");
  ingest_cmd->add_option("--out", ingest_out, "Corpus JSON output path")->required();
  ingest_cmd->callback([&] {
    std::size_t scanned = 0;
    auto files = ingest_directory(ingest_input, origin_from_string(ingest_origin), &scanned);
    save_corpus(files, ingest_out);
    std::cout << "scanned " << scanned << " files, kept " << files.size()
              << " after deduplication\n";
  });

  // --- clean ---
  auto* clean_cmd = app.add_subcommand("clean", "Strip boilerplate comments and normalize text");
  std::string clean_in, clean_out, clean_origin = "primary-proprietary";
  clean_cmd->add_option("--in", clean_in, "Corpus JSON file, or a directory of SKILL sources")
      ->required();
  clean_cmd->add_option("--origin", clean_origin, "Origin label when --in is a directory");
  clean_cmd->add_option("--out", clean_out,
                        "Corpus JSON output, or a directory when --in is a directory")
      ->required();
  clean_cmd->callback([&] {
    bool directory_mode = std::filesystem::is_directory(clean_in);
    std::vector<SourceFile> input = directory_mode
                                        ? ingest_directory(clean_in,
                                                           origin_from_string(clean_origin))
                                        : load_corpus(clean_in);
    std::vector<SourceFile> cleaned;
    for (const auto& file : input) {
      std::string text = normalize_comments(clean_text(file.text));
      cleaned.push_back(make_source_file(file.origin, file.path, std::move(text)));
    }
    auto unique = dedup_files(cleaned);
    if (directory_mode) {
      for (const auto& file : unique) {
        write_file(clean_out + "/" + file.path, file.text);
      }
    } else {
      save_corpus(unique, clean_out);
    }
    std::cout << "cleaned " << cleaned.size() << " files, kept " << unique.size()
              << " after deduplication\n";
  });

  // --- lint ---
  auto* lint_cmd = app.add_subcommand("lint", "Grade files and compute lint quality scores");
  std::string lint_in, lint_out, lint_single;
  lint_cmd->add_option("--in", lint_in, "Corpus JSON input");
  lint_cmd->add_option("--file", lint_single, "Lint a single SKILL file instead of a corpus");
  lint_cmd->add_option("--out", lint_out, "Corpus JSON output with reports attached");
  lint_cmd->callback([&] {
    if (!lint_single.empty()) {
      LintReport report = lint_file(read_file(lint_single));
      for (const auto& finding : report.findings) {
        std::cout << finding.rule_id << " [" << finding.span.start << "," << finding.span.end
                  << ") -" << finding.deduction << " " << finding.message << "\n";
      }
      std::cout << "grade " << to_string(report.grade) << ", iq " << report.iq << "\n";
      if (!report.passed()) {
        exit_code = 1;
      }
      return;
    }
    if (lint_in.empty()) {
      throw std::runtime_error("lint needs --in or --file");
    }
    auto files = load_corpus(lint_in);
    std::size_t passed = 0;
    long long iq_sum = 0;
    for (auto& file : files) {
      file.lint = lint_file(file.text);
      passed += file.lint->passed() ? 1 : 0;
      iq_sum += file.lint->iq;
      std::cout << file.path << ": " << to_string(file.lint->grade) << " iq=" << file.lint->iq
                << " findings=" << file.lint->findings.size() << "\n";
    }
    if (!files.empty()) {
      std::cout << "passed " << passed << "/" << files.size() << ", mean iq "
                << static_cast<double>(iq_sum) / static_cast<double>(files.size()) << "\n";
    }
    if (!lint_out.empty()) {
      save_corpus(files, lint_out);
    }
  });

  // --- mine ---
  auto* mine_cmd = app.add_subcommand("mine", "Extract supervised pairs from a corpus");
  std::string mine_in, mine_out, mine_manifest;
  mine_cmd->add_option("--in", mine_in, "Corpus JSON input")->required();
  mine_cmd->add_option("--out", mine_out, "Pair list JSON output")->required();
  mine_cmd->add_option("--manifest", mine_manifest,
                       "Also write a manifest with file and pair records");
  mine_cmd->callback([&] {
    auto files = load_corpus(mine_in);
    std::vector<Pair> pairs;
    for (const auto& file : files) {
      auto mined = mine_pairs(file);
      std::move(mined.begin(), mined.end(), std::back_inserter(pairs));
    }
    mark_top_level(pairs);
    save_pair_list(pairs, mine_out);
    if (!mine_manifest.empty()) {
      DatasetManifest manifest;
      for (const auto& file : files) {
        manifest.files.push_back(file);
      }
      manifest.pairs = pairs;
      save_manifest(manifest, mine_manifest);
    }
    std::map<PairKind, std::size_t> by_kind;
    std::size_t top_level = 0;
    for (const auto& pair : pairs) {
      ++by_kind[pair.kind];
      top_level += pair.top_level ? 1 : 0;
    }
    std::cout << "mined " << pairs.size() << " pairs (";
    bool first = true;
    for (const auto& [kind, count] : by_kind) {
      std::cout << (first ? "" : ", ") << to_string(kind) << " " << count;
      first = false;
    }
    std::cout << "), " << top_level << " top-level\n";
  });

  // --- mine-remote ---
  auto* remote_cmd = app.add_subcommand("mine-remote", "Mine public SKILL files via code search");
  std::string remote_corpus, remote_out, remote_fixture, remote_record;
  std::string remote_query = "cadence skill";
  std::uint64_t remote_seed = 0;
  std::size_t remote_min_count = 10, remote_concurrency = 4;
  double remote_fraction = 0.2;
  remote_cmd->add_option("--tokens-from", remote_corpus, "Seed corpus JSON for query tokens")
      ->required();
  remote_cmd->add_option("--out", remote_out, "Output directory")->required();
  remote_cmd->add_option("--fixture", remote_fixture,
                         "Replay recorded exchanges instead of calling the live API");
  remote_cmd->add_option("--record", remote_record, "Record live exchanges to this file");
  remote_cmd->add_option("--query", remote_query, "Repository search query");
  remote_cmd->add_option("--seed", remote_seed, "Token sampling seed");
  remote_cmd->add_option("--min-count", remote_min_count, "Minimum token occurrences");
  remote_cmd->add_option("--fraction", remote_fraction, "Fraction of frequent tokens to query");
  remote_cmd->add_option("--concurrency", remote_concurrency, "Concurrent file fetches");
  remote_cmd->callback([&] {
    std::vector<std::string> texts;
    for (const auto& file : load_corpus(remote_corpus)) {
      texts.push_back(file.text);
    }
    ReplayTransport replay;
    std::unique_ptr<LiveTransport> live;
    Transport* base = nullptr;
    if (!remote_fixture.empty()) {
      replay = ReplayTransport::from_file(remote_fixture);
      base = &replay;
    } else {
      const char* token = std::getenv("GITHUB_TOKEN");
      live = std::make_unique<LiveTransport>(token ? token : "");
      base = live.get();
    }
    std::unique_ptr<RecordingTransport> recorder;
    if (!remote_record.empty()) {
      recorder = std::make_unique<RecordingTransport>(*base);
      base = recorder.get();
    }
    GithubClient client(*base);
    MineRemoteOptions options;
    options.repo_query = remote_query;
    options.seed = remote_seed;
    options.min_token_count = remote_min_count;
    options.token_fraction = remote_fraction;
    options.concurrency = remote_concurrency;
    options.out_dir = remote_out;
    MineRemoteResult result = mine_remote(client, texts, options);
    if (recorder) {
      recorder->save(remote_record);
    }
    std::cout << "repos " << result.repos.size() << ", tokens queried " << result.tokens_queried
              << " (skipped " << result.tokens_skipped << "), files kept "
              << result.files.size() << ", rejected " << result.rejections.size() << "\n";
  });

  // --- filter ---
  auto* filter_cmd = app.add_subcommand("filter", "Apply a training-strategy file filter");
  std::string filter_in, filter_pairs, filter_out, filter_name = "none";
  std::size_t filter_min_pairs = 1;
  bool filter_strip_comments = false;
  filter_cmd->add_option("--in", filter_in, "Corpus JSON input")->required();
  filter_cmd->add_option("--pairs", filter_pairs, "Pair list JSON (for the has-pairs filter)");
  filter_cmd->add_option("--filter", filter_name,
                         "Filter: none, lint-pass, lint-iq-ge-10, has-pairs");
  filter_cmd->add_option("--min-pairs", filter_min_pairs, "has-pairs threshold");
  filter_cmd->add_flag("--strip-comments", filter_strip_comments,
                       "Remove comments from surviving files");
  filter_cmd->add_option("--out", filter_out, "Corpus JSON output")->required();
  filter_cmd->callback([&] {
    auto files = load_corpus(filter_in);
    std::vector<Pair> pairs;
    if (!filter_pairs.empty()) {
      pairs = load_pair_list(filter_pairs);
    }
    TrainingStrategy strategy;
    strategy.file_filter = file_filter_from_string(filter_name);
    strategy.keep_comments = !filter_strip_comments;
    FilterOptions options;
    options.min_pairs = filter_min_pairs;
    auto kept = filter_files(files, strategy, pairs, options);
    save_corpus(kept, filter_out);
    std::cout << "kept " << kept.size() << " of " << files.size() << " files\n";
  });

  // --- split ---
  auto* split_cmd = app.add_subcommand("split", "Build balanced train/val/test splits");
  std::string split_in, split_pairs, split_out;
  std::uint64_t split_seed = 0;
  SplitOptions split_options;
  split_cmd->add_option("--in", split_in, "Corpus JSON input")->required();
  split_cmd->add_option("--pairs", split_pairs, "Pair list JSON input")->required();
  split_cmd->add_option("--seed", split_seed, "Partition seed");
  split_cmd->add_option("--out", split_out, "Manifest output path")->required();
  split_cmd->add_option("--max-attempts", split_options.max_attempts, "Repartition attempts");
  split_cmd->add_option("--cf-tolerance", split_options.cf_tolerance,
                        "Allowed relative CF count imbalance");
  split_cmd->add_option("--min-pairs", split_options.min_pairs, "Eligibility pair threshold");
  split_cmd->callback([&] {
    auto files = load_corpus(split_in);
    for (auto& file : files) {
      if (!file.lint) {
        file.lint = lint_file(file.text);
      }
    }
    auto pairs = load_pair_list(split_pairs);
    DatasetManifest manifest = make_splits(files, pairs, split_seed, {}, split_options);
    save_manifest(manifest, split_out);
    std::map<Split, std::size_t> file_counts, pair_counts;
    for (const auto& [id, split] : manifest.file_split) {
      (void)id;
      ++file_counts[split];
    }
    for (const auto& [id, split] : manifest.pair_split) {
      (void)id;
      ++pair_counts[split];
    }
    for (Split split : {Split::Train, Split::Val, Split::Test}) {
      std::cout << to_string(split) << ": " << file_counts[split] << " files, "
                << pair_counts[split] << " pairs\n";
    }
    for (const auto& warning : manifest.warnings) {
      std::cout << "warning: " << warning << "\n";
    }
  });

  // --- train-tokenizer ---
  auto* tok_cmd = app.add_subcommand("train-tokenizer", "Learn a subword vocabulary");
  std::string tok_in, tok_out;
  std::size_t tok_size = 8000;
  bool tok_strip = false;
  tok_cmd->add_option("--in", tok_in, "Corpus JSON input")->required();
  tok_cmd->add_option("--vocab-size", tok_size, "Total vocabulary size");
  tok_cmd->add_flag("--strip-comments", tok_strip, "Strip comments before training");
  tok_cmd->add_option("--out", tok_out, "Vocabulary output path")->required();
  tok_cmd->callback([&] {
    std::vector<std::string> texts;
    for (const auto& file : load_corpus(tok_in)) {
      texts.push_back(tok_strip ? strip_comments(file.text) : file.text);
    }
    SubwordVocab vocab = SubwordVocab::train(texts, tok_size);
    vocab.save(tok_out);
    std::cout << "vocabulary size " << vocab.size() << " (" << vocab.merges().size()
              << " merges)\n";
  });

  // --- export-mlm ---
  auto* mlm_cmd = app.add_subcommand("export-mlm", "Write span-corruption training samples");
  std::string mlm_in, mlm_vocab, mlm_out;
  std::uint64_t mlm_seed = 0;
  MlmOptions mlm_options;
  mlm_cmd->add_option("--in", mlm_in, "Corpus JSON input")->required();
  mlm_cmd->add_option("--vocab", mlm_vocab, "Vocabulary path")->required();
  mlm_cmd->add_option("--seed", mlm_seed, "Corruption seed");
  mlm_cmd->add_option("--out", mlm_out, "Samples output path (JSON lines)")->required();
  mlm_cmd->add_option("--chunk-tokens", mlm_options.chunk_tokens, "Tokens per chunk");
  mlm_cmd->add_option("--mask-fraction", mlm_options.mask_fraction, "Fraction of tokens masked");
  mlm_cmd->add_option("--mean-span", mlm_options.mean_span_tokens, "Mean masked span length");
  mlm_cmd->add_option("--max-span", mlm_options.max_span_tokens, "Maximum masked span length");
  mlm_cmd->add_flag("--keep-short-final", mlm_options.keep_short_final,
                    "Keep the trailing partial chunk");
  mlm_cmd->callback([&] {
    auto files = load_corpus(mlm_in);
    SubwordVocab vocab = SubwordVocab::load(mlm_vocab);
    auto samples = build_mlm_samples(files, vocab, mlm_seed, mlm_options);
    write_mlm_samples(samples, mlm_out);
    std::cout << "wrote " << samples.size() << " samples\n";
  });

  // --- export-seq2seq ---
  auto* seq_cmd = app.add_subcommand("export-seq2seq", "Write supervised seq2seq samples");
  std::string seq_pairs, seq_vocab, seq_out;
  Seq2SeqOptions seq_options;
  seq_cmd->add_option("--pairs", seq_pairs, "Pair list JSON input")->required();
  seq_cmd->add_option("--vocab", seq_vocab, "Vocabulary path")->required();
  seq_cmd->add_option("--out", seq_out, "Samples output path (JSON lines)")->required();
  seq_cmd->add_option("--max-input", seq_options.max_input_tokens, "Input token budget");
  seq_cmd->add_option("--max-output", seq_options.max_output_tokens, "Output token budget");
  seq_cmd->add_option("--comment-budget", seq_options.max_comment_words,
                      "Word budget for input comments");
  seq_cmd->callback([&] {
    auto pairs = load_pair_list(seq_pairs);
    SubwordVocab vocab = SubwordVocab::load(seq_vocab);
    auto samples = build_seq2seq_samples(pairs, vocab, seq_options);
    write_seq2seq_samples(samples, seq_out);
    std::cout << "wrote " << samples.size() << " samples\n";
  });

  // --- bleu ---
  auto* bleu_cmd = app.add_subcommand("bleu", "Score a candidate file against a reference");
  std::string bleu_ref, bleu_cand, bleu_vocab;
  bool bleu_no_bp = false;
  bleu_cmd->add_option("--reference", bleu_ref, "Reference text file")->required();
  bleu_cmd->add_option("--candidate", bleu_cand, "Candidate text file")->required();
  bleu_cmd->add_option("--vocab", bleu_vocab, "Vocabulary path")->required();
  bleu_cmd->add_flag("--no-brevity-penalty", bleu_no_bp, "Disable the brevity penalty");
  bleu_cmd->callback([&] {
    SubwordVocab vocab = SubwordVocab::load(bleu_vocab);
    auto reference = vocab.encode(read_file(bleu_ref));
    auto candidate = vocab.encode(read_file(bleu_cand));
    BleuOptions options;
    options.brevity_penalty = !bleu_no_bp;
    BleuScore score = bleu(candidate, reference, options);
    std::cout << std::setprecision(10) << "bleu " << score.value
              << (score.degenerate ? " (degenerate candidate)" : "") << "\n";
    for (int n = 1; n <= 4; ++n) {
      BleuScore per_order = bleu_n(candidate, reference, n, options);
      std::cout << "bleu_" << n << " " << per_order.value << "\n";
    }
  });

  // --- delta-liq ---
  auto* dliq_cmd = app.add_subcommand("delta-liq",
                                      "Lint-quality change from splicing a prediction in");
  std::string dliq_file, dliq_pred;
  std::size_t dliq_start = 0, dliq_end = 0;
  dliq_cmd->add_option("--file", dliq_file, "SKILL source file")->required();
  dliq_cmd->add_option("--start", dliq_start, "Replaced span start (byte offset)")->required();
  dliq_cmd->add_option("--end", dliq_end, "Replaced span end (byte offset)")->required();
  dliq_cmd->add_option("--prediction", dliq_pred, "File holding the replacement text")
      ->required();
  dliq_cmd->callback([&] {
    SourceFile file = make_source_file(Origin::PrimaryProprietary, dliq_file,
                                       read_file(dliq_file));
    Pair pair;
    pair.file_id = file.id;
    pair.output_span = {dliq_start, dliq_end};
    int before = lint_file(file.text).iq;
    int delta = delta_liq(pair, read_file(dliq_pred), file);
    std::cout << "liq before " << before << ", after " << before + delta << ", delta " << delta
              << "\n";
  });

  // --- evaluate ---
  auto* eval_cmd = app.add_subcommand("evaluate", "Score model predictions on the test split");
  std::string eval_manifest, eval_corpus, eval_preds, eval_vocab, eval_out;
  bool eval_no_bp = false;
  eval_cmd->add_option("--manifest", eval_manifest, "Dataset manifest path")->required();
  eval_cmd->add_option("--corpus", eval_corpus, "Cleaned corpus JSON")->required();
  eval_cmd->add_option("--predictions", eval_preds, "Predictions JSON lines")->required();
  eval_cmd->add_option("--vocab", eval_vocab, "Vocabulary path")->required();
  eval_cmd->add_option("--out", eval_out, "Report JSON output path");
  eval_cmd->add_flag("--no-brevity-penalty", eval_no_bp, "Disable the brevity penalty");
  eval_cmd->callback([&] {
    EvalReport report =
        evaluate_from_paths(eval_manifest, eval_corpus, eval_preds, eval_vocab, !eval_no_bp);
    for (const auto& model : report.models) {
      std::cout << model.model_name << ": bleu " << std::setprecision(6) << model.overall.bleu
                << ", delta-liq " << model.overall.delta_iq << " over " << model.overall.count
                << " pairs";
      if (!model.missing_pair_ids.empty()) {
        std::cout << " (" << model.missing_pair_ids.size() << " missing)";
      }
      std::cout << "\n";
      for (const auto& [kind, means] : model.per_kind) {
        std::cout << "  " << to_string(kind) << ": bleu " << means.bleu << ", delta-liq "
                  << means.delta_iq << " over " << means.count << " pairs\n";
      }
    }
    if (!eval_out.empty()) {
      json doc;
      doc["models"] = json::array();
      for (const auto& model : report.models) {
        doc["models"].push_back(model_report_json(model));
      }
      write_file(eval_out, doc.dump(2) + "\n");
    }
  });

  // --- correlate ---
  auto* corr_cmd = app.add_subcommand("correlate",
                                      "Correlate automatic metrics with human scores");
  std::string corr_manifest, corr_corpus, corr_preds, corr_vocab, corr_human, corr_out;
  corr_cmd->add_option("--manifest", corr_manifest, "Dataset manifest path")->required();
  corr_cmd->add_option("--corpus", corr_corpus, "Cleaned corpus JSON")->required();
  corr_cmd->add_option("--predictions", corr_preds, "Predictions JSON lines")->required();
  corr_cmd->add_option("--vocab", corr_vocab, "Vocabulary path")->required();
  corr_cmd->add_option("--human", corr_human, "Human score table (csv or tsv)")->required();
  corr_cmd->add_option("--out", corr_out, "Correlation JSON output path");
  corr_cmd->callback([&] {
    EvalReport eval =
        evaluate_from_paths(corr_manifest, corr_corpus, corr_preds, corr_vocab, true);
    DatasetManifest manifest = load_manifest(corr_manifest);
    auto human = load_human_scores(corr_human);
    CorrelationReport report = correlate(eval, manifest, human);
    for (const auto& entry : report.entries) {
      std::cout << entry.metric << ": ";
      if (entry.r) {
        std::cout << std::setprecision(6) << *entry.r;
      } else {
        std::cout << "undefined";
      }
      std::cout << " (n=" << entry.count << ")\n";
    }
    for (const auto& kind : report.excluded_kinds) {
      std::cout << "excluded kind " << kind << ": human scores do not vary\n";
    }
    if (!report.unmatched_rows.empty()) {
      std::cout << report.unmatched_rows.size() << " human rows had no automatic score\n";
    }
    if (!corr_out.empty()) {
      json doc;
      doc["entries"] = json::array();
      for (const auto& entry : report.entries) {
        json row{{"metric", entry.metric}, {"count", entry.count}};
        if (entry.r) {
          row["r"] = *entry.r;
        } else {
          row["r"] = nullptr;
        }
        doc["entries"].push_back(std::move(row));
      }
      doc["excluded_kinds"] = report.excluded_kinds;
      doc["unmatched_rows"] = report.unmatched_rows;
      write_file(corr_out, doc.dump(2) + "\n");
    }
  });

  // --- survey-pack ---
  auto* survey_cmd = app.add_subcommand("survey-pack",
                                        "Prepare anonymized prompts for human review");
  std::string survey_manifest, survey_preds, survey_shortlist, survey_out;
  std::uint64_t survey_seed = 0;
  std::size_t survey_candidate_count = 60, survey_per_kind = 5;
  survey_cmd->add_option("--manifest", survey_manifest, "Dataset manifest path")->required();
  survey_cmd->add_option("--predictions", survey_preds, "Predictions JSON lines");
  survey_cmd->add_option("--shortlist", survey_shortlist,
                         "File of reviewed candidate pair ids, one per line");
  survey_cmd->add_option("--seed", survey_seed, "Sampling seed");
  survey_cmd->add_option("--candidates", survey_candidate_count, "Candidates listed per kind");
  survey_cmd->add_option("--per-kind", survey_per_kind, "Prompts per kind in the final pack");
  survey_cmd->add_option("--out", survey_out, "Output directory")->required();
  survey_cmd->callback([&] {
    DatasetManifest manifest = load_manifest(survey_manifest);
    if (survey_shortlist.empty()) {
      auto candidates = survey_candidates(manifest, survey_seed, survey_candidate_count);
      std::string lines;
      for (const auto& [kind, ids] : candidates) {
        for (const auto& id : ids) {
          lines += to_string(kind) + "\t" + id + "\n";
        }
      }
      write_file(survey_out + "/candidates.tsv", lines);
      std::cout << "wrote candidate shortlist to " << survey_out << "/candidates.tsv\n";
      return;
    }
    std::vector<std::string> shortlist;
    const std::string shortlist_data = read_file(survey_shortlist);
    for (auto line : split_lines(shortlist_data)) {
      // accept both bare ids and the kind\tid lines the candidates file uses
      auto tab = line.rfind('\t');
      std::string id(tab == std::string_view::npos ? line : line.substr(tab + 1));
      if (!id.empty()) {
        shortlist.push_back(std::move(id));
      }
    }
    auto predictions = load_predictions(survey_preds);
    SurveyPack pack = build_survey_pack(manifest, predictions, shortlist, survey_seed,
                                        survey_per_kind);
    save_survey_pack(pack, survey_out);
    std::cout << "wrote " << pack.prompts.size() << " prompts to " << survey_out
              << "/survey.json (key in survey_key.json)\n";
  });

  // --- run ---
  auto* run_cmd = app.add_subcommand("run", "Run the full dataset build pipeline");
  std::string run_config;
  run_cmd->add_option("--config", run_config, "Pipeline config JSON path")->required();
  run_cmd->callback([&] {
    PipelineConfig config = parse_pipeline_config(read_file(run_config));
    PipelineResult result = run_pipeline(config);
    for (const auto& stage : result.stages) {
      std::cout << "stage " << stage.name << ": " << (stage.cached ? "cached" : "run") << "\n";
    }
    std::cout << "files scanned " << result.files_scanned << ", kept " << result.files_kept
              << "\n";
    std::cout << "pairs mined " << result.pairs_mined << " (" << result.pairs_top_level
              << " top-level)\n";
    std::cout << "stages run " << result.stages_run << ", cached " << result.stages_cached
              << "\n";
    std::cout << "manifest: " << config.out_dir << "/manifest.jsonl\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}
