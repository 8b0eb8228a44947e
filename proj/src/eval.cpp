#include "skillkit/eval.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "json.hpp"
#include "skillkit/rng.hpp"
#include "skillkit/util.hpp"

namespace skillkit {
namespace {

using nlohmann::json;

MetricMeans finalize(double bleu_sum, double delta_sum, std::size_t count) {
  MetricMeans m;
  m.count = count;
  if (count > 0) {
    m.bleu = bleu_sum / static_cast<double>(count);
    m.delta_iq = delta_sum / static_cast<double>(count);
  }
  return m;
}

}  // namespace

std::vector<PredictionRecord> load_predictions(const std::string& path) {
  std::vector<PredictionRecord> records;
  std::size_t line_no = 0;
  const std::string data = read_file(path);  // keep alive: lines are views into it
  for (std::string_view line : split_lines(data)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      records.push_back({j.at("pair_id").get<std::string>(),
                         j.at("model_name").get<std::string>(),
                         j.at("prediction").get<std::string>()});
    } catch (const json::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

void save_predictions(const std::vector<PredictionRecord>& records, const std::string& path) {
  std::string out;
  for (const PredictionRecord& r : records) {
    const json j{{"pair_id", r.pair_id}, {"model_name", r.model_name},
                 {"prediction", r.prediction}};
    out += j.dump();
    out += '\n';
  }
  write_file(path, out);
}

EvalReport evaluate_predictions(const std::vector<PredictionRecord>& predictions,
                                const DatasetManifest& manifest, const SubwordVocab& vocab,
                                const std::map<std::string, SourceFile>& corpus,
                                const BleuOptions& bleu_options, const LintConfig& lint_config) {
  const std::vector<const Pair*> test_pairs = manifest.pairs_in_split(Split::Test);
  std::set<std::string> test_ids;
  for (const Pair* p : test_pairs) test_ids.insert(p->id);

  std::map<std::string, std::map<std::string, const PredictionRecord*>> by_model;
  std::map<std::string, std::vector<std::string>> unknown_by_model;
  for (const PredictionRecord& r : predictions) {
    by_model[r.model_name];  // register the model even if all rows are unknown
    if (!test_ids.count(r.pair_id)) {
      unknown_by_model[r.model_name].push_back(r.pair_id);
      continue;
    }
    by_model[r.model_name][r.pair_id] = &r;
  }

  EvalReport report;
  for (const auto& [model, rows] : by_model) {
    ModelReport mr;
    mr.model_name = model;
    mr.unknown_pair_ids = unknown_by_model.count(model) ? unknown_by_model[model]
                                                        : std::vector<std::string>{};
    double bleu_sum = 0.0;
    double delta_sum = 0.0;
    std::map<PairKind, std::array<double, 2>> kind_sums;
    std::map<PairKind, std::size_t> kind_counts;

    for (const Pair* pair : test_pairs) {
      const auto it = rows.find(pair->id);
      if (it == rows.end()) {
        mr.missing_pair_ids.push_back(pair->id);
        continue;
      }
      const std::string& prediction = it->second->prediction;
      const std::vector<TokenId> cand = vocab.encode(prediction);
      const std::vector<TokenId> ref = vocab.encode(pair->output_text);

      PairScore score;
      score.pair_id = pair->id;
      score.kind = pair->kind;
      score.bleu = bleu(cand, ref, bleu_options).value;
      for (int n = 1; n <= 4; ++n) {
        score.bleu_n[static_cast<std::size_t>(n - 1)] =
            bleu_n(cand, ref, n, bleu_options).value;
      }
      const auto file_it = corpus.find(pair->file_id);
      if (file_it == corpus.end()) {
        throw std::runtime_error("evaluate_predictions: corpus is missing file " +
                                 pair->file_id + " needed by pair " + pair->id);
      }
      score.delta_iq = delta_liq(*pair, prediction, file_it->second, lint_config);

      bleu_sum += score.bleu;
      delta_sum += score.delta_iq;
      kind_sums[pair->kind][0] += score.bleu;
      kind_sums[pair->kind][1] += score.delta_iq;
      ++kind_counts[pair->kind];
      mr.pair_scores.push_back(std::move(score));
    }
    mr.overall = finalize(bleu_sum, delta_sum, mr.pair_scores.size());
    for (const auto& [kind, sums] : kind_sums) {
      mr.per_kind[kind] = finalize(sums[0], sums[1], kind_counts[kind]);
    }
    report.models.push_back(std::move(mr));
  }
  return report;
}

std::optional<double> pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) {
    throw std::invalid_argument("pearson: input lengths differ");
  }
  const std::size_t n = xs.size();
  if (n < 2) return std::nullopt;
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    mean_x += xs[k];
    mean_y += ys[k];
  }
  mean_x /= static_cast<double>(n);
  mean_y /= static_cast<double>(n);
  double cov = 0.0;
  double var_x = 0.0;
  double var_y = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double dx = xs[k] - mean_x;
    const double dy = ys[k] - mean_y;
    cov += dx * dy;
    var_x += dx * dx;
    var_y += dy * dy;
  }
  if (var_x == 0.0 || var_y == 0.0) return std::nullopt;
  return cov / std::sqrt(var_x * var_y);
}

std::vector<HumanScore> load_human_scores(const std::string& path) {
  std::vector<HumanScore> rows;
  std::size_t line_no = 0;
  const std::string data = read_file(path);  // keep alive: lines are views into it
  for (std::string_view line : split_lines(data)) {
    ++line_no;
    if (line.empty()) continue;
    const char delim = line.find('\t') != std::string_view::npos ? '\t' : ',';
    std::vector<std::string> fields;
    std::string field;
    for (char c : line) {
      if (c == delim) {
        fields.push_back(field);
        field.clear();
      } else if (c != '\r') {
        field.push_back(c);
      }
    }
    fields.push_back(field);
    if (fields.size() != 3) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected pair_id, model_name, score");
    }
    try {
      rows.push_back({fields[0], fields[1], std::stod(fields[2])});
    } catch (const std::exception&) {
      if (line_no == 1) continue;  // header row
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": score '" + fields[2] + "' is not a number");
    }
  }
  return rows;
}

CorrelationReport correlate(const EvalReport& eval, const DatasetManifest& manifest,
                            const std::vector<HumanScore>& human) {
  CorrelationReport report;

  std::map<std::string, std::map<std::string, const PairScore*>> scores;  // model -> pair -> score
  for (const ModelReport& m : eval.models) {
    for (const PairScore& s : m.pair_scores) scores[m.model_name][s.pair_id] = &s;
  }

  // variance check per pair kind over the matched human rows
  std::map<PairKind, std::set<double>> kind_values;
  std::vector<std::pair<const HumanScore*, const PairScore*>> matched;
  for (const HumanScore& h : human) {
    const auto model_it = scores.find(h.model_name);
    const Pair* pair = manifest.find_pair(h.pair_id);
    const PairScore* s = nullptr;
    if (model_it != scores.end()) {
      const auto pair_it = model_it->second.find(h.pair_id);
      if (pair_it != model_it->second.end()) s = pair_it->second;
    }
    if (pair == nullptr || s == nullptr) {
      report.unmatched_rows.push_back(h.pair_id + "/" + h.model_name);
      continue;
    }
    kind_values[pair->kind].insert(h.score);
    matched.emplace_back(&h, s);
  }
  std::set<PairKind> excluded;
  for (const auto& [kind, values] : kind_values) {
    if (values.size() < 2) {
      excluded.insert(kind);
      report.excluded_kinds.push_back(to_string(kind));
    }
  }

  std::vector<double> human_vals;
  std::vector<std::array<double, 6>> metric_vals;
  for (const auto& [h, s] : matched) {
    const Pair* pair = manifest.find_pair(h->pair_id);
    if (excluded.count(pair->kind)) continue;
    human_vals.push_back(h->score);
    metric_vals.push_back({s->bleu, s->bleu_n[0], s->bleu_n[1], s->bleu_n[2], s->bleu_n[3],
                           static_cast<double>(s->delta_iq)});
  }
  const std::array<std::string, 6> names = {"bleu", "bleu_1", "bleu_2",
                                            "bleu_3", "bleu_4", "delta_iq"};
  for (std::size_t m = 0; m < names.size(); ++m) {
    std::vector<double> xs;
    xs.reserve(metric_vals.size());
    for (const auto& row : metric_vals) xs.push_back(row[m]);
    report.entries.push_back({names[m], pearson(xs, human_vals), xs.size()});
  }
  return report;
}

const std::array<std::string, 3>& survey_questions() {
  static const std::array<std::string, 3> questions = {
      "On a scale of 1 (very bad) to 5 (very good), how would you rate the quality of the "
      "input prompt (i.e. how well did the input prompt describe the code it was prompting)?",
      "On a scale of 1 (not at all) to 5 (very much), to what degree does the output "
      "reference follow logically from the input prompts?",
      "On a scale of 1 (very bad) to 10 (very good), rate each model's output based on the "
      "quality of the generated SKILL code as well as the degree to which the generated "
      "SKILL code logically follows from the input prompt."};
  return questions;
}

std::map<PairKind, std::vector<std::string>> survey_candidates(const DatasetManifest& manifest,
                                                               std::uint64_t seed,
                                                               std::size_t per_kind) {
  std::map<PairKind, std::vector<std::string>> by_kind;
  for (const Pair* p : manifest.pairs_in_split(Split::Test)) {
    by_kind[p->kind].push_back(p->id);
  }
  Rng rng(seed);
  for (PairKind kind : {PairKind::CF, PairKind::CC, PairKind::FC}) {
    auto it = by_kind.find(kind);
    if (it == by_kind.end()) continue;
    rng.shuffle(it->second);
    if (it->second.size() > per_kind) it->second.resize(per_kind);
  }
  return by_kind;
}

SurveyPack build_survey_pack(const DatasetManifest& manifest,
                             const std::vector<PredictionRecord>& predictions,
                             const std::vector<std::string>& shortlist, std::uint64_t seed,
                             std::size_t per_kind) {
  std::map<std::string, std::map<std::string, std::string>> by_pair_model;
  std::set<std::string> model_set;
  for (const PredictionRecord& r : predictions) {
    by_pair_model[r.pair_id][r.model_name] = r.prediction;
    model_set.insert(r.model_name);
  }
  const std::vector<std::string> models(model_set.begin(), model_set.end());

  std::map<PairKind, std::vector<const Pair*>> by_kind;
  std::vector<std::string> bad_ids;
  std::set<std::string> test_ids;
  for (const Pair* p : manifest.pairs_in_split(Split::Test)) test_ids.insert(p->id);
  for (const std::string& id : shortlist) {
    const Pair* pair = manifest.find_pair(id);
    if (pair == nullptr || !test_ids.count(id)) {
      bad_ids.push_back(id);
      continue;
    }
    by_kind[pair->kind].push_back(pair);
  }
  if (!bad_ids.empty()) {
    std::string joined;
    for (const std::string& id : bad_ids) {
      if (!joined.empty()) joined += ", ";
      joined += id;
    }
    throw std::invalid_argument("shortlist ids not in the test split: " + joined);
  }

  Rng rng(seed);
  SurveyPack pack;
  for (PairKind kind : {PairKind::CF, PairKind::CC, PairKind::FC}) {
    const auto it = by_kind.find(kind);
    if (it == by_kind.end()) continue;
    const std::vector<const Pair*> chosen =
        it->second.size() > per_kind ? rng.sample(it->second, per_kind) : it->second;
    for (const Pair* pair : chosen) {
      SurveyPrompt prompt;
      prompt.pair_id = pair->id;
      prompt.kind = pair->kind;
      prompt.input_text = pair->input_text;
      prompt.reference_output = pair->output_text;

      std::vector<std::string> order = models;
      rng.shuffle(order);
      for (std::size_t k = 0; k < order.size(); ++k) {
        const std::string label = "output-" + std::to_string(k + 1);
        std::string text;
        const auto pm = by_pair_model.find(pair->id);
        if (pm != by_pair_model.end()) {
          const auto row = pm->second.find(order[k]);
          if (row != pm->second.end()) text = row->second;
        }
        prompt.outputs.emplace_back(label, std::move(text));
        pack.key[pair->id][label] = order[k];
      }
      pack.prompts.push_back(std::move(prompt));
    }
  }
  return pack;
}

void save_survey_pack(const SurveyPack& pack, const std::string& dir) {
  json prompts = json::array();
  for (const SurveyPrompt& p : pack.prompts) {
    json outputs = json::array();
    for (const auto& [label, text] : p.outputs) {
      outputs.push_back({{"label", label}, {"text", text}});
    }
    prompts.push_back({{"pair_id", p.pair_id},
                       {"kind", to_string(p.kind)},
                       {"input", p.input_text},
                       {"reference", p.reference_output},
                       {"outputs", outputs}});
  }
  const json survey{{"questions", survey_questions()}, {"prompts", prompts}};
  write_file(dir + "/survey.json", survey.dump(2) + "\n");

  json key = json::object();
  for (const auto& [pair_id, labels] : pack.key) {
    json entry = json::object();
    for (const auto& [label, model] : labels) entry[label] = model;
    key[pair_id] = entry;
  }
  write_file(dir + "/survey_key.json", key.dump(2) + "\n");
}

}  // namespace skillkit
