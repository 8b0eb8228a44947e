#include "skillkit/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <stdexcept>

#include "json.hpp"
#include "skillkit/lint.hpp"
#include "skillkit/pair_miner.hpp"
#include "skillkit/preprocess.hpp"
#include "skillkit/tokenizer.hpp"
#include "skillkit/util.hpp"

namespace skillkit {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Config parsing and validation
// ---------------------------------------------------------------------------

void check_unknown_keys(const json& obj, const std::string& scope,
                        std::initializer_list<const char*> allowed,
                        std::vector<std::string>& diags) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    bool known = std::any_of(allowed.begin(), allowed.end(),
                             [&](const char* name) { return key == name; });
    if (!known) {
      diags.push_back(scope.empty() ? "unknown key '" + key + "'"
                                    : scope + ": unknown key '" + key + "'");
    }
  }
}

std::optional<std::uint64_t> get_uint(const json& obj, const char* key, const std::string& scope,
                                      std::uint64_t min_value, std::vector<std::string>& diags) {
  if (!obj.contains(key)) {
    return std::nullopt;
  }
  const json& value = obj[key];
  if (!value.is_number_unsigned()) {
    diags.push_back(scope + key + ": expected a non-negative integer");
    return std::nullopt;
  }
  auto parsed = value.get<std::uint64_t>();
  if (parsed < min_value) {
    diags.push_back(scope + key + ": must be at least " + std::to_string(min_value));
    return std::nullopt;
  }
  return parsed;
}

std::optional<double> get_number(const json& obj, const char* key, const std::string& scope,
                                 std::vector<std::string>& diags) {
  if (!obj.contains(key)) {
    return std::nullopt;
  }
  const json& value = obj[key];
  if (!value.is_number()) {
    diags.push_back(scope + key + ": expected a number");
    return std::nullopt;
  }
  return value.get<double>();
}

std::optional<bool> get_bool(const json& obj, const char* key, const std::string& scope,
                             std::vector<std::string>& diags) {
  if (!obj.contains(key)) {
    return std::nullopt;
  }
  const json& value = obj[key];
  if (!value.is_boolean()) {
    diags.push_back(scope + key + ": expected true or false");
    return std::nullopt;
  }
  return value.get<bool>();
}

std::optional<std::string> get_string(const json& obj, const char* key, const std::string& scope,
                                      std::vector<std::string>& diags) {
  if (!obj.contains(key)) {
    return std::nullopt;
  }
  const json& value = obj[key];
  if (!value.is_string()) {
    diags.push_back(scope + key + ": expected a string");
    return std::nullopt;
  }
  return value.get<std::string>();
}

PipelineConfig parse_config_document(const json& doc, std::vector<std::string>& diags) {
  PipelineConfig config;
  if (!doc.is_object()) {
    diags.push_back("config root must be a JSON object");
    return config;
  }
  check_unknown_keys(doc, "",
                     {"seed", "input_dir", "out_dir", "origin", "strategy", "vocab_size",
                      "min_pairs", "mlm", "seq2seq", "split"},
                     diags);

  if (auto seed = get_uint(doc, "seed", "", 0, diags)) {
    config.seed = *seed;
  }
  if (auto dir = get_string(doc, "input_dir", "", diags)) {
    config.input_dir = *dir;
  }
  if (config.input_dir.empty()) {
    diags.push_back("input_dir: required");
  }
  if (auto dir = get_string(doc, "out_dir", "", diags)) {
    config.out_dir = *dir;
  }
  if (config.out_dir.empty()) {
    diags.push_back("out_dir: required");
  }
  if (auto origin = get_string(doc, "origin", "", diags)) {
    try {
      config.origin = origin_from_string(*origin);
    } catch (const std::exception&) {
      diags.push_back("origin: unknown value '" + *origin + "'");
    }
  }
  if (auto size = get_uint(doc, "vocab_size", "", 0, diags)) {
    if (*size < 359) {
      diags.push_back("vocab_size: must be at least 359, the size of the byte-level base table");
    } else {
      config.vocab_size = static_cast<std::size_t>(*size);
    }
  }
  if (auto min_pairs = get_uint(doc, "min_pairs", "", 1, diags)) {
    config.min_pairs = static_cast<std::size_t>(*min_pairs);
  }

  if (doc.contains("strategy")) {
    const json& strategy = doc["strategy"];
    if (!strategy.is_object()) {
      diags.push_back("strategy: expected an object");
    } else {
      check_unknown_keys(
          strategy, "strategy",
          {"self_supervised", "supervised", "keep_comments", "deduplicated", "file_filter"},
          diags);
      if (auto v = get_bool(strategy, "self_supervised", "strategy.", diags)) {
        config.strategy.self_supervised = *v;
      }
      if (auto v = get_bool(strategy, "supervised", "strategy.", diags)) {
        config.strategy.supervised = *v;
      }
      if (auto v = get_bool(strategy, "keep_comments", "strategy.", diags)) {
        config.strategy.keep_comments = *v;
      }
      if (auto v = get_bool(strategy, "deduplicated", "strategy.", diags)) {
        config.strategy.deduplicated = *v;
      }
      if (auto v = get_string(strategy, "file_filter", "strategy.", diags)) {
        try {
          config.strategy.file_filter = file_filter_from_string(*v);
        } catch (const std::exception&) {
          diags.push_back("strategy.file_filter: unknown value '" + *v + "'");
        }
      }
    }
  }

  if (doc.contains("mlm")) {
    const json& mlm = doc["mlm"];
    if (!mlm.is_object()) {
      diags.push_back("mlm: expected an object");
    } else {
      check_unknown_keys(mlm, "mlm",
                         {"chunk_tokens", "mask_fraction", "mean_span_tokens", "max_span_tokens",
                          "keep_short_final"},
                         diags);
      if (auto v = get_uint(mlm, "chunk_tokens", "mlm.", 16, diags)) {
        config.mlm.chunk_tokens = static_cast<std::size_t>(*v);
      }
      if (auto v = get_number(mlm, "mask_fraction", "mlm.", diags)) {
        if (*v <= 0.0 || *v >= 1.0) {
          diags.push_back("mlm.mask_fraction: must lie strictly between 0 and 1");
        } else {
          config.mlm.mask_fraction = *v;
        }
      }
      if (auto v = get_number(mlm, "mean_span_tokens", "mlm.", diags)) {
        config.mlm.mean_span_tokens = *v;
      }
      if (auto v = get_uint(mlm, "max_span_tokens", "mlm.", 1, diags)) {
        config.mlm.max_span_tokens = static_cast<std::size_t>(*v);
      }
      if (auto v = get_bool(mlm, "keep_short_final", "mlm.", diags)) {
        config.mlm.keep_short_final = *v;
      }
      double cap_mean = (static_cast<double>(config.mlm.max_span_tokens) + 1.0) / 2.0;
      if (config.mlm.mean_span_tokens <= 1.0 || config.mlm.mean_span_tokens >= cap_mean) {
        diags.push_back("mlm.mean_span_tokens: must lie in (1, (max_span_tokens + 1) / 2)");
      }
    }
  }

  if (doc.contains("seq2seq")) {
    const json& seq = doc["seq2seq"];
    if (!seq.is_object()) {
      diags.push_back("seq2seq: expected an object");
    } else {
      check_unknown_keys(seq, "seq2seq",
                         {"max_input_tokens", "max_output_tokens", "max_comment_words"}, diags);
      if (auto v = get_uint(seq, "max_input_tokens", "seq2seq.", 8, diags)) {
        config.seq2seq.max_input_tokens = static_cast<std::size_t>(*v);
      }
      if (auto v = get_uint(seq, "max_output_tokens", "seq2seq.", 8, diags)) {
        config.seq2seq.max_output_tokens = static_cast<std::size_t>(*v);
      }
      if (auto v = get_uint(seq, "max_comment_words", "seq2seq.", 1, diags)) {
        config.seq2seq.max_comment_words = static_cast<std::size_t>(*v);
      }
    }
  }

  if (doc.contains("split")) {
    const json& split = doc["split"];
    if (!split.is_object()) {
      diags.push_back("split: expected an object");
    } else {
      check_unknown_keys(split, "split", {"max_attempts", "cf_tolerance"}, diags);
      if (auto v = get_uint(split, "max_attempts", "split.", 1, diags)) {
        config.split.max_attempts = static_cast<std::size_t>(*v);
      }
      if (auto v = get_number(split, "cf_tolerance", "split.", diags)) {
        if (*v < 0.0) {
          diags.push_back("split.cf_tolerance: must be non-negative");
        } else {
          config.split.cf_tolerance = *v;
        }
      }
    }
  }

  config.split.min_pairs = config.min_pairs;
  return config;
}

// ---------------------------------------------------------------------------
// Intermediate records persisted between stages
// ---------------------------------------------------------------------------

json lint_report_json(const LintReport& report) {
  json findings = json::array();
  for (const auto& finding : report.findings) {
    findings.push_back(json{{"rule_id", finding.rule_id},
                            {"start", finding.span.start},
                            {"end", finding.span.end},
                            {"deduction", finding.deduction},
                            {"message", finding.message}});
  }
  return json{{"grade", to_string(report.grade)}, {"iq", report.iq},
              {"findings", std::move(findings)}};
}

LintReport lint_report_from_json(const json& record) {
  LintReport report;
  report.grade = lint_grade_from_string(record.at("grade").get<std::string>());
  report.iq = record.at("iq").get<int>();
  for (const auto& entry : record.at("findings")) {
    LintFinding finding;
    finding.rule_id = entry.at("rule_id").get<std::string>();
    finding.span = {entry.at("start").get<std::size_t>(), entry.at("end").get<std::size_t>()};
    finding.deduction = entry.at("deduction").get<int>();
    finding.message = entry.at("message").get<std::string>();
    report.findings.push_back(std::move(finding));
  }
  return report;
}

json file_record(const SourceFile& file) {
  json record{{"id", file.id},
              {"origin", to_string(file.origin)},
              {"path", file.path},
              {"text", file.text}};
  if (file.lint) {
    record["lint"] = lint_report_json(*file.lint);
  }
  return record;
}

SourceFile file_from_record(const json& record) {
  SourceFile file;
  file.id = record.at("id").get<std::string>();
  file.origin = origin_from_string(record.at("origin").get<std::string>());
  file.path = record.at("path").get<std::string>();
  file.text = record.at("text").get<std::string>();
  if (record.contains("lint")) {
    file.lint = lint_report_from_json(record["lint"]);
  }
  return file;
}

json pair_record(const Pair& pair) {
  return json{{"id", pair.id},
              {"file_id", pair.file_id},
              {"kind", to_string(pair.kind)},
              {"input_start", pair.input_span.start},
              {"input_end", pair.input_span.end},
              {"output_start", pair.output_span.start},
              {"output_end", pair.output_span.end},
              {"input_text", pair.input_text},
              {"output_text", pair.output_text},
              {"top_level", pair.top_level},
              {"split_completion", pair.split_completion}};
}

Pair pair_from_record(const json& record) {
  Pair pair;
  pair.id = record.at("id").get<std::string>();
  pair.file_id = record.at("file_id").get<std::string>();
  pair.kind = pair_kind_from_string(record.at("kind").get<std::string>());
  pair.input_span = {record.at("input_start").get<std::size_t>(),
                     record.at("input_end").get<std::size_t>()};
  pair.output_span = {record.at("output_start").get<std::size_t>(),
                      record.at("output_end").get<std::size_t>()};
  pair.input_text = record.at("input_text").get<std::string>();
  pair.output_text = record.at("output_text").get<std::string>();
  pair.top_level = record.at("top_level").get<bool>();
  pair.split_completion = record.at("split_completion").get<bool>();
  return pair;
}

// ---------------------------------------------------------------------------
// Stage cache: a stage reruns only when its input signature or any recorded
// output digest changed.
// ---------------------------------------------------------------------------

class StageCache {
 public:
  explicit StageCache(std::string out_dir) : out_dir_(std::move(out_dir)) {
    std::string path = cache_path();
    if (fs::exists(path)) {
      json parsed = json::parse(read_file(path), nullptr, false);
      entries_ = parsed.is_object() ? std::move(parsed) : json::object();
    } else {
      entries_ = json::object();
    }
  }

  std::string file_digest(const std::string& relative) const {
    return content_hash(read_file(out_dir_ + "/" + relative));
  }

  bool fresh(const std::string& stage, const std::string& signature,
             const std::vector<std::string>& outputs) const {
    if (!entries_.contains(stage)) {
      return false;
    }
    const json& entry = entries_[stage];
    if (entry.value("signature", std::string()) != signature) {
      return false;
    }
    const json& recorded = entry.contains("outputs") ? entry["outputs"] : json::object();
    for (const auto& relative : outputs) {
      std::string full = out_dir_ + "/" + relative;
      if (!recorded.contains(relative) || !fs::exists(full)) {
        return false;
      }
      if (content_hash(read_file(full)) != recorded[relative].get<std::string>()) {
        return false;
      }
    }
    return true;
  }

  void record(const std::string& stage, const std::string& signature,
              const std::vector<std::string>& outputs) {
    json recorded = json::object();
    for (const auto& relative : outputs) {
      recorded[relative] = file_digest(relative);
    }
    entries_[stage] = json{{"signature", signature}, {"outputs", std::move(recorded)}};
    write_file(cache_path(), entries_.dump(2) + "\n");
  }

 private:
  std::string cache_path() const { return out_dir_ + "/cache.json"; }

  std::string out_dir_;
  json entries_;
};

std::string strategy_signature(const TrainingStrategy& strategy) {
  std::string sig;
  sig += strategy.self_supervised ? "ss1" : "ss0";
  sig += strategy.supervised ? "sv1" : "sv0";
  sig += strategy.keep_comments ? "kc1" : "kc0";
  sig += strategy.deduplicated ? "dd1" : "dd0";
  sig += "|" + to_string(strategy.file_filter);
  return sig;
}

std::string join_signature(const std::vector<std::string>& parts) {
  std::string joined;
  for (const auto& part : parts) {
    joined += part;
    joined += '\n';
  }
  return content_hash(joined);
}

}  // namespace

std::vector<std::string> validate_pipeline_config(const std::string& json_text) {
  std::vector<std::string> diags;
  json doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded()) {
    diags.push_back("config is not valid JSON");
    return diags;
  }
  parse_config_document(doc, diags);
  return diags;
}

PipelineConfig parse_pipeline_config(const std::string& json_text) {
  json doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded()) {
    throw std::invalid_argument("config is not valid JSON");
  }
  std::vector<std::string> diags;
  PipelineConfig config = parse_config_document(doc, diags);
  if (!diags.empty()) {
    std::string message = "invalid pipeline config:";
    for (const auto& diag : diags) {
      message += "\n  " + diag;
    }
    throw std::invalid_argument(message);
  }
  return config;
}

void save_corpus(const std::vector<SourceFile>& files, const std::string& path) {
  json doc = json::array();
  for (const auto& file : files) {
    doc.push_back(file_record(file));
  }
  write_file(path, doc.dump() + "\n");
}

std::vector<SourceFile> load_corpus(const std::string& path) {
  std::vector<SourceFile> files;
  for (const auto& record : json::parse(read_file(path))) {
    files.push_back(file_from_record(record));
  }
  return files;
}

void save_pair_list(const std::vector<Pair>& pairs, const std::string& path) {
  json doc = json::array();
  for (const auto& pair : pairs) {
    doc.push_back(pair_record(pair));
  }
  write_file(path, doc.dump() + "\n");
}

std::vector<Pair> load_pair_list(const std::string& path) {
  std::vector<Pair> pairs;
  for (const auto& record : json::parse(read_file(path))) {
    pairs.push_back(pair_from_record(record));
  }
  return pairs;
}

std::vector<SourceFile> ingest_directory(const std::string& input_dir, Origin origin,
                                         std::size_t* scanned) {
  if (!fs::exists(input_dir)) {
    throw std::runtime_error("input directory not found: " + input_dir);
  }
  std::vector<std::pair<std::string, std::string>> inputs;  // relative path, text
  for (const auto& entry : fs::recursive_directory_iterator(input_dir)) {
    if (!entry.is_regular_file()) {
      continue;
    }
    std::string extension = entry.path().extension().string();
    if (extension != ".il" && extension != ".ils") {
      continue;
    }
    std::string relative = fs::relative(entry.path(), input_dir).generic_string();
    inputs.emplace_back(std::move(relative), read_file(entry.path().string()));
  }
  std::sort(inputs.begin(), inputs.end());
  if (scanned) {
    *scanned = inputs.size();
  }
  std::vector<SourceFile> files;
  files.reserve(inputs.size());
  for (auto& [path, text] : inputs) {
    files.push_back(make_source_file(origin, std::move(path), std::move(text)));
  }
  return dedup_files(files);
}

PipelineResult run_pipeline(const PipelineConfig& config) {
  PipelineResult result;
  const std::string& out = config.out_dir;
  fs::create_directories(out);
  StageCache cache(out);

  auto run_stage = [&](const std::string& name, const std::string& signature,
                       const std::vector<std::string>& outputs,
                       const std::function<void()>& body) {
    StageOutcome outcome{name, false, outputs};
    if (cache.fresh(name, signature, outputs)) {
      outcome.cached = true;
      ++result.stages_cached;
    } else {
      body();
      cache.record(name, signature, outputs);
      ++result.stages_run;
    }
    result.stages.push_back(std::move(outcome));
  };

  // Ingest: scan the input tree for SKILL sources in path order.
  std::vector<SourceFile> ingested =
      ingest_directory(config.input_dir, config.origin, &result.files_scanned);
  std::vector<std::string> ingest_parts{to_string(config.origin)};
  for (const auto& file : ingested) {
    ingest_parts.push_back(file.path + ":" + file.id);
  }
  run_stage("ingest", join_signature(ingest_parts), {"work/ingest.json"},
            [&] { save_corpus(ingested, out + "/work/ingest.json"); });

  run_stage("clean", join_signature({cache.file_digest("work/ingest.json")}),
            {"work/clean.json"}, [&] {
              std::vector<SourceFile> cleaned;
              for (const auto& file : load_corpus(out + "/work/ingest.json")) {
                std::string text = normalize_comments(clean_text(file.text));
                cleaned.push_back(make_source_file(file.origin, file.path, std::move(text)));
              }
              save_corpus(dedup_files(cleaned), out + "/work/clean.json");
            });
  std::vector<SourceFile> files = load_corpus(out + "/work/clean.json");
  result.files_kept = files.size();
  std::string clean_digest = cache.file_digest("work/clean.json");

  run_stage("lint", join_signature({clean_digest}), {"work/lint.json"}, [&] {
    json doc = json::array();
    for (const auto& file : files) {
      doc.push_back(json{{"id", file.id}, {"lint", lint_report_json(lint_file(file.text))}});
    }
    write_file(out + "/work/lint.json", doc.dump() + "\n");
  });
  {
    std::map<std::string, LintReport> reports;
    for (const auto& record : json::parse(read_file(out + "/work/lint.json"))) {
      reports[record.at("id").get<std::string>()] = lint_report_from_json(record.at("lint"));
    }
    for (auto& file : files) {
      auto it = reports.find(file.id);
      if (it != reports.end()) {
        file.lint = it->second;
      }
    }
  }

  run_stage("mine", join_signature({clean_digest}), {"work/pairs.json"}, [&] {
    std::vector<Pair> mined;
    for (const auto& file : files) {
      std::vector<Pair> file_pairs = mine_pairs(file);
      std::move(file_pairs.begin(), file_pairs.end(), std::back_inserter(mined));
    }
    mark_top_level(mined);
    save_pair_list(mined, out + "/work/pairs.json");
  });
  std::vector<Pair> pairs = load_pair_list(out + "/work/pairs.json");
  result.pairs_mined = pairs.size();
  result.pairs_top_level = static_cast<std::size_t>(
      std::count_if(pairs.begin(), pairs.end(), [](const Pair& p) { return p.top_level; }));
  std::string pairs_digest = cache.file_digest("work/pairs.json");
  std::string lint_digest = cache.file_digest("work/lint.json");

  SplitOptions split_options = config.split;
  split_options.min_pairs = config.min_pairs;
  run_stage("split",
            join_signature({clean_digest, lint_digest, pairs_digest,
                            std::to_string(config.seed), strategy_signature(config.strategy),
                            std::to_string(split_options.max_attempts),
                            std::to_string(split_options.cf_tolerance),
                            std::to_string(split_options.min_pairs)}),
            {"work/split.jsonl"}, [&] {
              DatasetManifest split_manifest =
                  make_splits(files, pairs, config.seed, config.strategy, split_options);
              save_manifest(split_manifest, out + "/work/split.jsonl");
            });
  DatasetManifest manifest = load_manifest(out + "/work/split.jsonl");
  std::string split_digest = cache.file_digest("work/split.jsonl");

  run_stage("filter",
            join_signature({clean_digest, lint_digest, pairs_digest,
                            strategy_signature(config.strategy),
                            std::to_string(config.min_pairs)}),
            {"work/filter.json"}, [&] {
              FilterOptions filter_options;
              filter_options.min_pairs = config.min_pairs;
              std::vector<SourceFile> kept =
                  filter_files(files, config.strategy, pairs, filter_options);
              json ids = json::array();
              for (const auto& file : kept) {
                ids.push_back(file.id);
              }
              write_file(out + "/work/filter.json", json{{"kept", std::move(ids)}}.dump() + "\n");
            });
  std::set<std::string> kept_ids;
  for (const auto& id : json::parse(read_file(out + "/work/filter.json")).at("kept")) {
    kept_ids.insert(id.get<std::string>());
  }
  std::string filter_digest = cache.file_digest("work/filter.json");

  // Self-supervised corpus: train-split files that survive the file filter,
  // with comments stripped unless the strategy keeps them.
  std::vector<SourceFile> corpus;
  for (const auto& file : files) {
    auto it = manifest.file_split.find(file.id);
    if (it == manifest.file_split.end() || it->second != Split::Train) {
      continue;
    }
    if (!kept_ids.count(file.id)) {
      continue;
    }
    SourceFile entry = file;
    if (!config.strategy.keep_comments) {
      entry.text = strip_comments(entry.text);
    }
    corpus.push_back(std::move(entry));
  }

  run_stage("tokenizer",
            join_signature({clean_digest, filter_digest, split_digest,
                            std::to_string(config.vocab_size),
                            config.strategy.keep_comments ? "kc1" : "kc0"}),
            {"vocab.txt"}, [&] {
              std::vector<std::string> texts;
              texts.reserve(corpus.size());
              for (const auto& file : corpus) {
                texts.push_back(file.text);
              }
              SubwordVocab vocab = SubwordVocab::train(texts, config.vocab_size);
              vocab.save(out + "/vocab.txt");
            });
  SubwordVocab vocab = SubwordVocab::load(out + "/vocab.txt");
  std::string vocab_digest = cache.file_digest("vocab.txt");

  std::map<std::string, std::string> exports;
  exports["vocab.txt"] = vocab_digest;

  if (config.strategy.self_supervised) {
    run_stage("export-mlm",
              join_signature({vocab_digest, filter_digest, split_digest,
                              std::to_string(config.seed),
                              std::to_string(config.mlm.chunk_tokens),
                              std::to_string(config.mlm.mask_fraction),
                              std::to_string(config.mlm.mean_span_tokens),
                              std::to_string(config.mlm.max_span_tokens),
                              config.mlm.keep_short_final ? "short1" : "short0",
                              config.strategy.keep_comments ? "kc1" : "kc0"}),
              {"mlm.jsonl"}, [&] {
                std::vector<MlmSample> samples =
                    build_mlm_samples(corpus, vocab, config.seed, config.mlm);
                std::string lines;
                for (const auto& sample : samples) {
                  lines += json{{"chunk_index", sample.chunk_index},
                                {"file_ids", sample.file_ids},
                                {"input_ids", sample.corrupted_ids},
                                {"target_ids", sample.target_ids}}
                               .dump() +
                           "\n";
                }
                write_file(out + "/mlm.jsonl", lines);
              });
    exports["mlm.jsonl"] = cache.file_digest("mlm.jsonl");
  }

  if (config.strategy.supervised) {
    std::vector<std::string> seq_outputs{"seq2seq.train.jsonl", "seq2seq.val.jsonl",
                                         "seq2seq.test.jsonl"};
    run_stage("export-seq2seq",
              join_signature({vocab_digest, pairs_digest, split_digest,
                              std::to_string(config.seq2seq.max_input_tokens),
                              std::to_string(config.seq2seq.max_output_tokens),
                              std::to_string(config.seq2seq.max_comment_words),
                              config.strategy.deduplicated ? "dd1" : "dd0"}),
              seq_outputs, [&] {
                for (Split split : {Split::Train, Split::Val, Split::Test}) {
                  std::vector<Pair> selected;
                  for (const auto& pair : pairs) {
                    auto it = manifest.pair_split.find(pair.id);
                    if (it == manifest.pair_split.end() || it->second != split) {
                      continue;
                    }
                    // Deduplicated strategies train only on top-level pairs;
                    // val and test are already top-level by selection.
                    if (split == Split::Train && config.strategy.deduplicated &&
                        !pair.top_level) {
                      continue;
                    }
                    selected.push_back(pair);
                  }
                  std::vector<Seq2SeqSample> samples =
                      build_seq2seq_samples(selected, vocab, config.seq2seq);
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
                  write_file(out + "/seq2seq." + to_string(split) + ".jsonl", lines);
                }
              });
    for (const auto& name : seq_outputs) {
      exports[name] = cache.file_digest(name);
    }
  }

  std::vector<std::string> manifest_parts{split_digest};
  for (const auto& [name, digest] : exports) {
    manifest_parts.push_back(name + ":" + digest);
  }
  run_stage("manifest", join_signature(manifest_parts), {"manifest.jsonl"}, [&] {
    manifest.exports = exports;
    save_manifest(manifest, out + "/manifest.jsonl");
  });
  result.manifest = load_manifest(out + "/manifest.jsonl");
  return result;
}

}  // namespace skillkit
