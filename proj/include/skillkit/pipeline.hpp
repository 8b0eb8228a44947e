#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "skillkit/core.hpp"
#include "skillkit/dataset.hpp"
#include "skillkit/manifest.hpp"

namespace skillkit {

// Everything an end-to-end dataset build needs, loadable from a JSON file.
struct PipelineConfig {
  std::uint64_t seed = 0;
  std::string input_dir;
  std::string out_dir;
  Origin origin = Origin::PrimaryProprietary;
  TrainingStrategy strategy;
  std::size_t vocab_size = 8000;
  std::size_t min_pairs = 1;  // eligibility threshold, splits and filtering
  MlmOptions mlm;
  Seq2SeqOptions seq2seq;
  SplitOptions split;
};

// All problems found in a config document: unknown keys, wrong types, and
// out-of-range values, each prefixed with its location. Empty means valid.
std::vector<std::string> validate_pipeline_config(const std::string& json_text);

// Parses a config document, throwing std::invalid_argument that lists every
// diagnostic when validation fails.
PipelineConfig parse_pipeline_config(const std::string& json_text);

struct StageOutcome {
  std::string name;
  bool cached = false;
  std::vector<std::string> outputs;  // paths relative to out_dir
};

struct PipelineResult {
  DatasetManifest manifest;
  std::vector<StageOutcome> stages;
  std::size_t files_scanned = 0;
  std::size_t files_kept = 0;
  std::size_t pairs_mined = 0;
  std::size_t pairs_top_level = 0;
  std::size_t stages_run = 0;
  std::size_t stages_cached = 0;
};

// Runs the build end to end: ingest, clean, lint, mine, split, filter,
// tokenizer training, the two exports, and the manifest. Each stage persists
// its outputs under out_dir and is skipped on reruns when its input
// signature and output digests still match the stage cache.
PipelineResult run_pipeline(const PipelineConfig& config);

// JSON array round-trips for corpora (lint reports included when attached)
// and mined pair lists, shared by the pipeline stages and the CLI.
void save_corpus(const std::vector<SourceFile>& files, const std::string& path);
std::vector<SourceFile> load_corpus(const std::string& path);
void save_pair_list(const std::vector<Pair>& pairs, const std::string& path);
std::vector<Pair> load_pair_list(const std::string& path);

// Scans a directory tree for .il/.ils files in path order and ingests them
// under the given origin, dropping byte-identical duplicates. scanned, when
// non-null, receives the pre-deduplication count.
std::vector<SourceFile> ingest_directory(const std::string& input_dir, Origin origin,
                                         std::size_t* scanned = nullptr);

}  // namespace skillkit
