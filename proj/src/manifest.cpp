#include "skillkit/manifest.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

#include "json.hpp"
#include "skillkit/util.hpp"

namespace skillkit {
namespace {

using nlohmann::json;

json lint_to_json(const LintReport& report) {
  json findings = json::array();
  for (const LintFinding& f : report.findings) {
    findings.push_back({{"rule_id", f.rule_id},
                        {"span_start", f.span.start},
                        {"span_end", f.span.end},
                        {"deduction", f.deduction},
                        {"message", f.message}});
  }
  return {{"grade", to_string(report.grade)}, {"iq", report.iq}, {"findings", findings}};
}

LintReport lint_from_json(const json& j) {
  LintReport report;
  report.grade = lint_grade_from_string(j.at("grade").get<std::string>());
  report.iq = j.at("iq").get<int>();
  for (const json& f : j.at("findings")) {
    report.findings.push_back({f.at("rule_id").get<std::string>(),
                               {f.at("span_start").get<std::size_t>(),
                                f.at("span_end").get<std::size_t>()},
                               f.at("deduction").get<int>(),
                               f.at("message").get<std::string>()});
  }
  return report;
}

json strategy_to_json(const TrainingStrategy& s) {
  return {{"self_supervised", s.self_supervised},
          {"file_filter", to_string(s.file_filter)},
          {"keep_comments", s.keep_comments},
          {"supervised", s.supervised},
          {"deduplicated", s.deduplicated}};
}

TrainingStrategy strategy_from_json(const json& j) {
  TrainingStrategy s;
  s.self_supervised = j.at("self_supervised").get<bool>();
  s.file_filter = file_filter_from_string(j.at("file_filter").get<std::string>());
  s.keep_comments = j.at("keep_comments").get<bool>();
  s.supervised = j.at("supervised").get<bool>();
  s.deduplicated = j.at("deduplicated").get<bool>();
  return s;
}

json split_map_to_json(const std::map<std::string, Split>& splits) {
  json out = json::object();
  for (const auto& [id, split] : splits) out[id] = to_string(split);
  return out;
}

std::map<std::string, Split> split_map_from_json(const json& j) {
  std::map<std::string, Split> out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    out[it.key()] = split_from_string(it.value().get<std::string>());
  }
  return out;
}

}  // namespace

const SourceFile* DatasetManifest::find_file(const std::string& id) const {
  for (const SourceFile& f : files) {
    if (f.id == id) return &f;
  }
  return nullptr;
}

const Pair* DatasetManifest::find_pair(const std::string& id) const {
  for (const Pair& p : pairs) {
    if (p.id == id) return &p;
  }
  return nullptr;
}

std::vector<const Pair*> DatasetManifest::pairs_in_split(Split split) const {
  std::vector<const Pair*> out;
  for (const Pair& p : pairs) {
    const auto it = pair_split.find(p.id);
    if (it != pair_split.end() && it->second == split) out.push_back(&p);
  }
  return out;
}

std::string manifest_to_string(const DatasetManifest& manifest) {
  std::vector<const SourceFile*> files;
  for (const SourceFile& f : manifest.files) files.push_back(&f);
  std::sort(files.begin(), files.end(), [](const SourceFile* a, const SourceFile* b) {
    return std::tie(a->path, a->id) < std::tie(b->path, b->id);
  });
  std::vector<const Pair*> pairs;
  for (const Pair& p : manifest.pairs) pairs.push_back(&p);
  std::sort(pairs.begin(), pairs.end(), [](const Pair* a, const Pair* b) {
    return std::tie(a->file_id, a->input_span.start, a->output_span.start, a->id) <
           std::tie(b->file_id, b->input_span.start, b->output_span.start, b->id);
  });

  std::string out;
  for (const SourceFile* f : files) {
    json record{{"record_type", "file"},
                {"id", f->id},
                {"origin", to_string(f->origin)},
                {"path", f->path}};
    if (f->lint) record["lint"] = lint_to_json(*f->lint);
    out += record.dump();
    out += '\n';
  }
  for (const Pair* p : pairs) {
    json record{{"record_type", "pair"},
                {"id", p->id},
                {"file_id", p->file_id},
                {"kind", to_string(p->kind)},
                {"input_start", p->input_span.start},
                {"input_end", p->input_span.end},
                {"output_start", p->output_span.start},
                {"output_end", p->output_span.end},
                {"input_text", p->input_text},
                {"output_text", p->output_text},
                {"top_level", p->top_level},
                {"split_completion", p->split_completion}};
    out += record.dump();
    out += '\n';
  }
  json split{{"record_type", "split"},
             {"seed", manifest.seed},
             {"strategy", strategy_to_json(manifest.strategy)},
             {"file_splits", split_map_to_json(manifest.file_split)},
             {"pair_splits", split_map_to_json(manifest.pair_split)}};
  out += split.dump();
  out += '\n';
  for (const auto& [name, digest] : manifest.exports) {
    json record{{"record_type", "export"}, {"name", name}, {"digest", digest}};
    out += record.dump();
    out += '\n';
  }
  return out;
}

DatasetManifest manifest_from_string(std::string_view data) {
  DatasetManifest manifest;
  std::map<std::string, std::size_t> file_index;
  std::map<std::string, std::size_t> pair_index;
  std::size_t line_no = 0;
  for (std::string_view line : split_lines(data)) {
    ++line_no;
    if (line.empty()) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw std::runtime_error("manifest line " + std::to_string(line_no) + ": " + e.what());
    }
    try {
      const std::string type = record.at("record_type").get<std::string>();
      if (type == "file") {
        SourceFile f;
        f.id = record.at("id").get<std::string>();
        f.origin = origin_from_string(record.at("origin").get<std::string>());
        f.path = record.at("path").get<std::string>();
        if (record.contains("lint")) f.lint = lint_from_json(record.at("lint"));
        const auto it = file_index.find(f.id);
        if (it != file_index.end()) {
          manifest.files[it->second] = std::move(f);  // later records win
        } else {
          file_index[f.id] = manifest.files.size();
          manifest.files.push_back(std::move(f));
        }
      } else if (type == "pair") {
        Pair p;
        p.id = record.at("id").get<std::string>();
        p.file_id = record.at("file_id").get<std::string>();
        p.kind = pair_kind_from_string(record.at("kind").get<std::string>());
        p.input_span = {record.at("input_start").get<std::size_t>(),
                        record.at("input_end").get<std::size_t>()};
        p.output_span = {record.at("output_start").get<std::size_t>(),
                         record.at("output_end").get<std::size_t>()};
        p.input_text = record.at("input_text").get<std::string>();
        p.output_text = record.at("output_text").get<std::string>();
        p.top_level = record.at("top_level").get<bool>();
        p.split_completion = record.at("split_completion").get<bool>();
        const auto it = pair_index.find(p.id);
        if (it != pair_index.end()) {
          manifest.pairs[it->second] = std::move(p);
        } else {
          pair_index[p.id] = manifest.pairs.size();
          manifest.pairs.push_back(std::move(p));
        }
      } else if (type == "split") {
        manifest.seed = record.at("seed").get<std::uint64_t>();
        manifest.strategy = strategy_from_json(record.at("strategy"));
        manifest.file_split = split_map_from_json(record.at("file_splits"));
        manifest.pair_split = split_map_from_json(record.at("pair_splits"));
      } else if (type == "export") {
        manifest.exports[record.at("name").get<std::string>()] =
            record.at("digest").get<std::string>();
      } else {
        throw std::runtime_error("unknown record_type '" + type + "'");
      }
    } catch (const json::exception& e) {
      throw std::runtime_error("manifest line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return manifest;
}

void save_manifest(const DatasetManifest& manifest, const std::string& path) {
  write_file(path, manifest_to_string(manifest));
}

DatasetManifest load_manifest(const std::string& path) {
  return manifest_from_string(read_file(path));
}

}  // namespace skillkit
