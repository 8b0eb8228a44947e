#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "skillkit/bleu.hpp"
#include "skillkit/core.hpp"
#include "skillkit/lint.hpp"
#include "skillkit/manifest.hpp"
#include "skillkit/tokenizer.hpp"

namespace skillkit {

struct PredictionRecord {
  std::string pair_id;
  std::string model_name;
  std::string prediction;
};

std::vector<PredictionRecord> load_predictions(const std::string& path);
void save_predictions(const std::vector<PredictionRecord>& records, const std::string& path);

struct PairScore {
  std::string pair_id;
  PairKind kind = PairKind::CF;
  double bleu = 0.0;
  std::array<double, 4> bleu_n{};  // single-order precisions, n = 1..4
  int delta_iq = 0;
};

struct MetricMeans {
  double bleu = 0.0;
  double delta_iq = 0.0;
  std::size_t count = 0;
};

struct ModelReport {
  std::string model_name;
  MetricMeans overall;
  std::map<PairKind, MetricMeans> per_kind;
  std::vector<PairScore> pair_scores;
  std::vector<std::string> missing_pair_ids;  // test pairs with no prediction
  std::vector<std::string> unknown_pair_ids;  // predictions for non-test pairs
};

struct EvalReport {
  std::vector<ModelReport> models;
};

// Scores every model's predictions over the manifest's test pairs with BLEU
// and the lint-quality delta. corpus maps file id to the cleaned file, which
// delta scoring patches predictions into.
EvalReport evaluate_predictions(const std::vector<PredictionRecord>& predictions,
                                const DatasetManifest& manifest,
                                const SubwordVocab& vocab,
                                const std::map<std::string, SourceFile>& corpus,
                                const BleuOptions& bleu_options = {},
                                const LintConfig& lint_config = {});

// Sample Pearson correlation; nullopt when either side has zero variance or
// fewer than two points.
std::optional<double> pearson(const std::vector<double>& xs, const std::vector<double>& ys);

struct HumanScore {
  std::string pair_id;
  std::string model_name;
  double score = 0.0;
};

// Parses a delimited table (comma or tab): pair_id, model_name, score. A
// leading header row is skipped.
std::vector<HumanScore> load_human_scores(const std::string& path);

struct CorrelationEntry {
  std::string metric;
  std::optional<double> r;
  std::size_t count = 0;
};

struct CorrelationReport {
  std::vector<CorrelationEntry> entries;
  // pair kinds excluded because every human score for them was identical
  std::vector<std::string> excluded_kinds;
  // human rows whose pair or model had no automatic score
  std::vector<std::string> unmatched_rows;
};

// Correlates each automatic metric with human scores over matching
// (pair, model) rows, excluding pair kinds whose human scores do not vary.
CorrelationReport correlate(const EvalReport& eval, const DatasetManifest& manifest,
                            const std::vector<HumanScore>& human);

// The three questions shown to reviewers for each survey prompt.
const std::array<std::string, 3>& survey_questions();

struct SurveyPrompt {
  std::string pair_id;
  PairKind kind = PairKind::CF;
  std::string input_text;
  std::string reference_output;
  std::vector<std::pair<std::string, std::string>> outputs;  // label -> text
};

struct SurveyPack {
  std::vector<SurveyPrompt> prompts;
  // sealed separately: prompt pair_id -> (label -> model name)
  std::map<std::string, std::map<std::string, std::string>> key;
};

// Stage one: a seeded shortlist of candidate pair ids per kind.
std::map<PairKind, std::vector<std::string>> survey_candidates(const DatasetManifest& manifest,
                                                               std::uint64_t seed,
                                                               std::size_t per_kind = 60);

// Stage two: picks per_kind pairs per type from the reviewed shortlist and
// attaches every model's output under a shuffled anonymous label.
SurveyPack build_survey_pack(const DatasetManifest& manifest,
                             const std::vector<PredictionRecord>& predictions,
                             const std::vector<std::string>& shortlist, std::uint64_t seed,
                             std::size_t per_kind = 5);

// Writes dir/survey.json (questions and anonymized prompts) and
// dir/survey_key.json (the label-to-model key, kept separate on purpose).
void save_survey_pack(const SurveyPack& pack, const std::string& dir);

}  // namespace skillkit
