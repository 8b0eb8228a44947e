#include "doctest.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "skillkit/eval.hpp"
#include "skillkit/util.hpp"

using namespace skillkit;

namespace {

// Two real files so delta scoring can patch predictions back into them.
const std::string kIncText = "procedure(inc(i)\n  i + 1\n)\n";
const std::string kPickText = "procedure(pick(a b)\n  bestOf(a,b)\n)\n";

struct EvalFixture {
  DatasetManifest manifest;
  std::map<std::string, SourceFile> corpus;
  SubwordVocab vocab;

  EvalFixture() : vocab(SubwordVocab::train({kIncText, kPickText}, 359)) {
    SourceFile inc = make_source_file(Origin::PrimaryProprietary, "inc.il", kIncText);
    SourceFile pick = make_source_file(Origin::PrimaryProprietary, "pick.il", kPickText);

    Pair p1;
    p1.id = "pair-inc";
    p1.file_id = inc.id;
    p1.kind = PairKind::FC;
    p1.input_span = {0, 16};
    p1.output_span = {19, 24};
    p1.input_text = kIncText.substr(0, 16);
    p1.output_text = kIncText.substr(19, 5);
    p1.top_level = true;

    Pair p2;
    p2.id = "pair-pick";
    p2.file_id = pick.id;
    p2.kind = PairKind::CF;
    p2.input_span = {0, 19};
    p2.output_span = {22, 33};
    p2.input_text = kPickText.substr(0, 19);
    p2.output_text = kPickText.substr(22, 11);
    p2.top_level = true;

    Pair p3 = p1;
    p3.id = "pair-train";

    manifest.files = {inc, pick};
    manifest.pairs = {p1, p2, p3};
    manifest.pair_split = {{"pair-inc", Split::Test},
                           {"pair-pick", Split::Test},
                           {"pair-train", Split::Train}};
    manifest.file_split = {{inc.id, Split::Test}, {pick.id, Split::Test}};
    corpus.emplace(inc.id, inc);
    corpus.emplace(pick.id, pick);
  }
};

const ModelReport& model_named(const EvalReport& report, const std::string& name) {
  for (const ModelReport& m : report.models) {
    if (m.model_name == name) return m;
  }
  REQUIRE(false);
  return report.models.front();
}

}  // namespace

TEST_CASE("echoing the reference scores bleu one and delta zero") {
  EvalFixture fx;
  const std::vector<PredictionRecord> preds = {
      {"pair-inc", "echo", "i + 1"},
      {"pair-pick", "echo", "bestOf(a,b)"},
  };
  const EvalReport report = evaluate_predictions(preds, fx.manifest, fx.vocab, fx.corpus);

  REQUIRE(report.models.size() == 1);
  const ModelReport& mr = report.models[0];
  CHECK(mr.model_name == "echo");
  REQUIRE(mr.pair_scores.size() == 2);
  CHECK(mr.missing_pair_ids.empty());
  CHECK(mr.unknown_pair_ids.empty());

  // pair_scores follow the manifest's pair order
  CHECK(mr.pair_scores[0].pair_id == "pair-inc");
  CHECK(mr.pair_scores[1].pair_id == "pair-pick");
  for (const PairScore& s : mr.pair_scores) {
    CHECK(s.bleu == 1.0);
    for (double p : s.bleu_n) CHECK(p == 1.0);
    CHECK(s.delta_iq == 0);
  }
  CHECK(mr.pair_scores[0].kind == PairKind::FC);
  CHECK(mr.pair_scores[1].kind == PairKind::CF);

  CHECK(mr.overall.count == 2);
  CHECK(mr.overall.bleu == 1.0);
  CHECK(mr.overall.delta_iq == 0.0);
  REQUIRE(mr.per_kind.count(PairKind::FC) == 1);
  REQUIRE(mr.per_kind.count(PairKind::CF) == 1);
  CHECK(mr.per_kind.at(PairKind::FC).count == 1);
  CHECK(mr.per_kind.at(PairKind::CF).count == 1);
}

TEST_CASE("delta rewards style fixes and punishes syntax damage") {
  EvalFixture fx;
  const std::vector<PredictionRecord> preds = {
      {"pair-pick", "fixer", "bestOf(a, b)"},  // comma spacing fixed: +1
      {"pair-inc", "fixer", "(((("},           // four unmatched opens: iq 100 -> 0
  };
  const EvalReport report = evaluate_predictions(preds, fx.manifest, fx.vocab, fx.corpus);
  const ModelReport& mr = model_named(report, "fixer");

  REQUIRE(mr.pair_scores.size() == 2);
  const PairScore& broken = mr.pair_scores[0];
  const PairScore& fixed = mr.pair_scores[1];
  CHECK(broken.pair_id == "pair-inc");
  CHECK(broken.delta_iq == -100);
  CHECK(broken.bleu < 1.0);
  CHECK(fixed.pair_id == "pair-pick");
  CHECK(fixed.delta_iq == 1);
  CHECK(mr.overall.delta_iq == doctest::Approx(-49.5));
}

TEST_CASE("missing and unknown predictions are tracked per model") {
  EvalFixture fx;
  const std::vector<PredictionRecord> preds = {
      {"pair-inc", "partial", "i + 1"},
      {"pair-train", "partial", "x"},  // train pair: unknown to the test set
      {"ghost", "partial", "y"},       // no such pair at all
      {"ghost", "noop", "z"},
  };
  const EvalReport report = evaluate_predictions(preds, fx.manifest, fx.vocab, fx.corpus);
  REQUIRE(report.models.size() == 2);

  const ModelReport& noop = report.models[0];  // models come back sorted by name
  CHECK(noop.model_name == "noop");
  CHECK(noop.pair_scores.empty());
  CHECK(noop.unknown_pair_ids == std::vector<std::string>{"ghost"});
  CHECK(noop.missing_pair_ids == std::vector<std::string>{"pair-inc", "pair-pick"});
  CHECK(noop.overall.count == 0);
  CHECK(noop.overall.bleu == 0.0);

  const ModelReport& partial = report.models[1];
  CHECK(partial.model_name == "partial");
  REQUIRE(partial.pair_scores.size() == 1);
  CHECK(partial.pair_scores[0].pair_id == "pair-inc");
  CHECK(partial.missing_pair_ids == std::vector<std::string>{"pair-pick"});
  CHECK(partial.unknown_pair_ids == std::vector<std::string>{"pair-train", "ghost"});
}

TEST_CASE("an empty prediction scores zero bleu without breaking the file") {
  EvalFixture fx;
  const std::vector<PredictionRecord> preds = {{"pair-inc", "m", ""}};
  const EvalReport report = evaluate_predictions(preds, fx.manifest, fx.vocab, fx.corpus);
  const ModelReport& mr = model_named(report, "m");
  REQUIRE(mr.pair_scores.size() == 1);
  CHECK(mr.pair_scores[0].bleu == 0.0);
  for (double p : mr.pair_scores[0].bleu_n) CHECK(p == 0.0);
  // the patched file still parses cleanly, so the lint delta is zero
  CHECK(mr.pair_scores[0].delta_iq == 0);
}

TEST_CASE("scoring a pair whose file is absent from the corpus throws") {
  EvalFixture fx;
  std::map<std::string, SourceFile> partial_corpus;
  const SourceFile& inc = fx.manifest.files[0];
  partial_corpus.emplace(inc.id, inc);
  const std::vector<PredictionRecord> preds = {{"pair-pick", "m", "x"}};
  CHECK_THROWS_AS(evaluate_predictions(preds, fx.manifest, fx.vocab, partial_corpus),
                  std::runtime_error);
}

TEST_CASE("pearson matches closed-form values") {
  const auto r = pearson({1, 2, 3, 4}, {2, 1, 4, 3});
  REQUIRE(r.has_value());
  CHECK(*r == doctest::Approx(0.6).epsilon(1e-12));

  const auto up = pearson({1, 2, 3, 4}, {3, 5, 7, 9});  // y = 2x + 1
  REQUIRE(up.has_value());
  CHECK(*up == doctest::Approx(1.0).epsilon(1e-12));

  const auto down = pearson({1, 2, 3, 4}, {9, 8, 7, 6});  // y = 10 - x
  REQUIRE(down.has_value());
  CHECK(*down == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("pearson is undefined for constants and tiny samples") {
  CHECK_FALSE(pearson({2, 2, 2}, {1, 2, 3}).has_value());
  CHECK_FALSE(pearson({1, 2, 3}, {5, 5, 5}).has_value());
  CHECK_FALSE(pearson({}, {}).has_value());
  CHECK_FALSE(pearson({1}, {2}).has_value());
  CHECK_THROWS_AS(pearson({1, 2}, {1, 2, 3}), std::invalid_argument);
}

TEST_CASE("prediction files round-trip as json lines") {
  const std::string path = "predictions_roundtrip.jsonl";
  const std::vector<PredictionRecord> records = {
      {"p-1", "model-a", "foreach(x lst\n  doStep(x)\n)"},
      {"p-2", "model-b", ""},
      {"p-3", "model-a", "text with \"quotes\" and \ttabs"},
  };
  save_predictions(records, path);
  const std::vector<PredictionRecord> loaded = load_predictions(path);
  REQUIRE(loaded.size() == records.size());
  for (std::size_t k = 0; k < records.size(); ++k) {
    CHECK(loaded[k].pair_id == records[k].pair_id);
    CHECK(loaded[k].model_name == records[k].model_name);
    CHECK(loaded[k].prediction == records[k].prediction);
  }
  std::remove(path.c_str());
}

TEST_CASE("malformed prediction lines report the offending line") {
  const std::string path = "predictions_bad.jsonl";
  write_file(path, "{\"pair_id\":\"a\",\"model_name\":\"m\",\"prediction\":\"x\"}\nnot json\n");
  CHECK_THROWS_AS(load_predictions(path), std::runtime_error);
  // blank lines are fine and skipped
  write_file(path, "\n{\"pair_id\":\"a\",\"model_name\":\"m\",\"prediction\":\"x\"}\n\n");
  CHECK(load_predictions(path).size() == 1);
  std::remove(path.c_str());
}

TEST_CASE("human score tables accept commas, tabs, and a header row") {
  const std::string path = "human_scores.csv";

  write_file(path, "pair_id,model_name,score\np-a,m1,4\np-b,m1,3.5\n");
  auto rows = load_human_scores(path);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].pair_id == "p-a");
  CHECK(rows[0].model_name == "m1");
  CHECK(rows[0].score == 4.0);
  CHECK(rows[1].score == 3.5);

  // tab-delimited with CRLF endings
  write_file(path, "p-a\tm1\t2\r\n");
  rows = load_human_scores(path);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].model_name == "m1");
  CHECK(rows[0].score == 2.0);

  // a numeric first line is data, not a header
  write_file(path, "p-a,m1,4\n");
  CHECK(load_human_scores(path).size() == 1);

  write_file(path, "only,two\n");
  CHECK_THROWS_AS(load_human_scores(path), std::runtime_error);

  write_file(path, "pair_id,model_name,score\np-a,m1,oops\n");
  CHECK_THROWS_AS(load_human_scores(path), std::runtime_error);

  std::remove(path.c_str());
}

namespace {

// A manifest plus hand-filled automatic scores for correlation tests: two CF
// pairs with varying scores and two CC pairs.
struct CorrelationFixture {
  DatasetManifest manifest;
  EvalReport eval;

  CorrelationFixture() {
    const char* ids[] = {"pa", "pb", "pc", "pd"};
    const PairKind kinds[] = {PairKind::CF, PairKind::CF, PairKind::CC, PairKind::CC};
    ModelReport mr;
    mr.model_name = "m1";
    for (int k = 0; k < 4; ++k) {
      Pair p;
      p.id = ids[k];
      p.file_id = "f";
      p.kind = kinds[k];
      manifest.pairs.push_back(p);
      manifest.pair_split[p.id] = Split::Test;

      PairScore s;
      s.pair_id = p.id;
      s.kind = p.kind;
      s.bleu = 0.1 + 0.2 * k;
      for (int n = 0; n < 4; ++n) s.bleu_n[static_cast<std::size_t>(n)] = s.bleu + 0.01 * n;
      s.delta_iq = k;
      mr.pair_scores.push_back(s);
    }
    eval.models.push_back(std::move(mr));
  }
};

}  // namespace

TEST_CASE("correlate reports every metric over matched rows") {
  CorrelationFixture fx;
  const std::vector<HumanScore> human = {
      {"pa", "m1", 1.0}, {"pb", "m1", 5.0},  // CF varies
      {"pc", "m1", 3.0}, {"pd", "m1", 3.0},  // CC does not
      {"ghost", "m1", 2.0},                  // no such pair
      {"pa", "mX", 2.0},                     // no such model
  };
  const CorrelationReport report = correlate(fx.eval, fx.manifest, human);

  CHECK(report.unmatched_rows == std::vector<std::string>{"ghost/m1", "pa/mX"});
  CHECK(report.excluded_kinds == std::vector<std::string>{"CC"});

  REQUIRE(report.entries.size() == 6);
  const char* names[] = {"bleu", "bleu_1", "bleu_2", "bleu_3", "bleu_4", "delta_iq"};
  for (std::size_t m = 0; m < 6; ++m) {
    CHECK(report.entries[m].metric == names[m]);
    CHECK(report.entries[m].count == 2);  // only the CF rows survive
    REQUIRE(report.entries[m].r.has_value());
    // every metric increases from pa to pb, as do the human scores
    CHECK(*report.entries[m].r == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("correlate excludes every kind when no human scores vary") {
  CorrelationFixture fx;
  const std::vector<HumanScore> human = {
      {"pa", "m1", 2.0}, {"pb", "m1", 2.0}, {"pc", "m1", 3.0}, {"pd", "m1", 3.0}};
  const CorrelationReport report = correlate(fx.eval, fx.manifest, human);
  CHECK(report.excluded_kinds == std::vector<std::string>{"CF", "CC"});
  for (const CorrelationEntry& e : report.entries) {
    CHECK(e.count == 0);
    CHECK_FALSE(e.r.has_value());
  }
}

namespace {

// Manifest with three CF and two CC test pairs plus one FC train pair.
DatasetManifest survey_manifest() {
  DatasetManifest manifest;
  const char* cf_ids[] = {"cf1", "cf2", "cf3"};
  const char* cc_ids[] = {"cc1", "cc2"};
  for (const char* id : cf_ids) {
    Pair p;
    p.id = id;
    p.file_id = "f";
    p.kind = PairKind::CF;
    p.input_text = std::string("input of ") + id;
    p.output_text = std::string("reference of ") + id;
    manifest.pairs.push_back(p);
    manifest.pair_split[id] = Split::Test;
  }
  for (const char* id : cc_ids) {
    Pair p;
    p.id = id;
    p.file_id = "f";
    p.kind = PairKind::CC;
    p.input_text = std::string("input of ") + id;
    p.output_text = std::string("reference of ") + id;
    manifest.pairs.push_back(p);
    manifest.pair_split[id] = Split::Test;
  }
  Pair train;
  train.id = "fc0";
  train.file_id = "f";
  train.kind = PairKind::FC;
  manifest.pairs.push_back(train);
  manifest.pair_split["fc0"] = Split::Train;
  return manifest;
}

}  // namespace

TEST_CASE("survey questions cover prompt, coherence, and output quality") {
  const auto& qs = survey_questions();
  REQUIRE(qs.size() == 3);
  CHECK(qs[0].find("1 (very bad) to 5 (very good)") != std::string::npos);
  CHECK(qs[1].find("follow logically") != std::string::npos);
  CHECK(qs[2].find("to 10") != std::string::npos);
  CHECK(qs[2].find("SKILL") != std::string::npos);
}

TEST_CASE("survey candidates shortlist test pairs per kind") {
  const DatasetManifest manifest = survey_manifest();
  const auto picks = survey_candidates(manifest, 9, 2);

  REQUIRE(picks.count(PairKind::CF) == 1);
  REQUIRE(picks.count(PairKind::CC) == 1);
  CHECK(picks.count(PairKind::FC) == 0);  // fc0 is a train pair
  CHECK(picks.at(PairKind::CF).size() == 2);
  CHECK(picks.at(PairKind::CC).size() == 2);
  for (const std::string& id : picks.at(PairKind::CF)) {
    CHECK(id.rfind("cf", 0) == 0);
  }
  CHECK(picks == survey_candidates(manifest, 9, 2));

  // a generous budget keeps every candidate, shuffled
  const auto all = survey_candidates(manifest, 9, 60);
  CHECK(all.at(PairKind::CF).size() == 3);
  CHECK(all.at(PairKind::CC).size() == 2);
}

TEST_CASE("survey packs anonymize model outputs behind labeled keys") {
  const DatasetManifest manifest = survey_manifest();
  const std::vector<PredictionRecord> preds = {
      {"cf1", "modelAx", "alpha"}, {"cf2", "modelAx", "beta"}, {"cc1", "modelAx", "gamma"},
      {"cf1", "modelBx", "delta"}, {"cc1", "modelBx", "epsilon"},
      // no modelBx row for cf2: its anonymized slot must come back empty
  };
  const std::vector<std::string> shortlist = {"cf1", "cf2", "cc1"};
  const SurveyPack pack = build_survey_pack(manifest, preds, shortlist, 5, 5);

  REQUIRE(pack.prompts.size() == 3);
  // prompts group by kind in CF, CC, FC order
  CHECK(pack.prompts[0].kind == PairKind::CF);
  CHECK(pack.prompts[1].kind == PairKind::CF);
  CHECK(pack.prompts[2].kind == PairKind::CC);

  for (const SurveyPrompt& prompt : pack.prompts) {
    const Pair* pair = manifest.find_pair(prompt.pair_id);
    REQUIRE(pair != nullptr);
    CHECK(prompt.input_text == pair->input_text);
    CHECK(prompt.reference_output == pair->output_text);

    REQUIRE(prompt.outputs.size() == 2);
    CHECK(prompt.outputs[0].first == "output-1");
    CHECK(prompt.outputs[1].first == "output-2");

    REQUIRE(pack.key.count(prompt.pair_id) == 1);
    const auto& labels = pack.key.at(prompt.pair_id);
    std::vector<std::string> models;
    for (const auto& [label, model] : labels) models.push_back(model);
    std::sort(models.begin(), models.end());
    CHECK(models == std::vector<std::string>{"modelAx", "modelBx"});

    // each labeled text is exactly the keyed model's prediction
    for (const auto& [label, text] : prompt.outputs) {
      const std::string& model = labels.at(label);
      std::string expected;
      for (const PredictionRecord& r : preds) {
        if (r.pair_id == prompt.pair_id && r.model_name == model) expected = r.prediction;
      }
      CHECK(text == expected);
    }
  }

  // sampling down to one prompt per kind keeps shortlisted pairs only
  const SurveyPack small = build_survey_pack(manifest, preds, shortlist, 5, 1);
  REQUIRE(small.prompts.size() == 2);
  CHECK(small.prompts[0].kind == PairKind::CF);
  CHECK(small.prompts[1].kind == PairKind::CC);

  CHECK_THROWS_AS(build_survey_pack(manifest, preds, {"cf1", "fc0"}, 5, 5),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_survey_pack(manifest, preds, {"nope"}, 5, 5), std::invalid_argument);
}

TEST_CASE("saved survey files keep the key out of the questionnaire") {
  const DatasetManifest manifest = survey_manifest();
  const std::vector<PredictionRecord> preds = {
      {"cf1", "modelAx", "alpha"}, {"cf1", "modelBx", "delta"}};
  const SurveyPack pack = build_survey_pack(manifest, preds, {"cf1"}, 5, 5);

  const std::string dir = "survey_pack_tmp";
  std::filesystem::create_directories(dir);
  save_survey_pack(pack, dir);

  const std::string survey_text = read_file(dir + "/survey.json");
  CHECK(survey_text.find("modelAx") == std::string::npos);
  CHECK(survey_text.find("modelBx") == std::string::npos);

  const nlohmann::json survey = nlohmann::json::parse(survey_text);
  const auto& qs = survey_questions();
  REQUIRE(survey.at("questions").size() == qs.size());
  for (std::size_t k = 0; k < qs.size(); ++k) {
    CHECK(survey.at("questions")[k].get<std::string>() == qs[k]);
  }
  REQUIRE(survey.at("prompts").size() == 1);
  const auto& prompt = survey.at("prompts")[0];
  CHECK(prompt.at("pair_id") == "cf1");
  CHECK(prompt.at("kind") == "CF");
  CHECK(prompt.at("outputs").size() == 2);

  const nlohmann::json key = nlohmann::json::parse(read_file(dir + "/survey_key.json"));
  REQUIRE(key.count("cf1") == 1);
  for (const auto& [label, model] : pack.key.at("cf1")) {
    CHECK(key.at("cf1").at(label).get<std::string>() == model);
  }

  std::filesystem::remove_all(dir);
}
