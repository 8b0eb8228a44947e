#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "skillkit/github_miner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <set>
#include <thread>

#include "json.hpp"
#include "skillkit/core.hpp"
#include "skillkit/lexer.hpp"
#include "skillkit/rng.hpp"
#include "skillkit/util.hpp"

namespace skillkit {
namespace {

using nlohmann::json;

constexpr const char* kApiBase = "https://api.github.com";
constexpr std::size_t kPerPage = 100;
constexpr std::size_t kMaxPages = 10;

std::string url_encode(const std::string& text) {
  static const char* hex = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : text) {
    if (std::isalnum(c) || c == '_' || c == '.' || c == '~' || c == '-') {
      out.push_back(static_cast<char>(c));
    } else if (c == ' ') {
      out.push_back('+');
    } else {
      out.push_back('%');
      out.push_back(hex[c >> 4]);
      out.push_back(hex[c & 0xf]);
    }
  }
  return out;
}

json parse_body(const std::string& body, const std::string& url) {
  json parsed = json::parse(body, nullptr, false);
  if (parsed.is_discarded()) {
    throw std::runtime_error("unparseable response body from " + url);
  }
  return parsed;
}

bool has_extension(const std::string& path, const std::vector<std::string>& extensions) {
  for (const auto& ext : extensions) {
    if (path.size() >= ext.size() &&
        path.compare(path.size() - ext.size(), ext.size(), ext) == 0) {
      return true;
    }
  }
  return false;
}

std::string sanitize_filename(const std::string& name) {
  std::string out;
  for (char c : name) {
    bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-';
    out.push_back(keep ? c : '_');
  }
  return out;
}

std::string basename_of(const std::string& path) {
  auto pos = path.find_last_of('/');
  return pos == std::string::npos ? path : path.substr(pos + 1);
}

}  // namespace

ReplayTransport::ReplayTransport(ReplayTransport&& other) noexcept {
  std::lock_guard<std::mutex> lock(other.mutex_);
  responses_ = std::move(other.responses_);
  cursor_ = std::move(other.cursor_);
}

ReplayTransport& ReplayTransport::operator=(ReplayTransport&& other) noexcept {
  if (this != &other) {
    std::scoped_lock lock(mutex_, other.mutex_);
    responses_ = std::move(other.responses_);
    cursor_ = std::move(other.cursor_);
  }
  return *this;
}

ReplayTransport ReplayTransport::from_file(const std::string& path) {
  ReplayTransport transport;
  json doc = json::parse(read_file(path));
  for (const auto& exchange : doc.at("exchanges")) {
    HttpResponse response;
    response.status = exchange.at("status").get<int>();
    response.body = exchange.at("body").is_string() ? exchange.at("body").get<std::string>()
                                                    : exchange.at("body").dump();
    transport.add(exchange.at("url").get<std::string>(), std::move(response));
  }
  return transport;
}

void ReplayTransport::add(const std::string& url, HttpResponse response) {
  std::lock_guard<std::mutex> lock(mutex_);
  responses_[url].push_back(std::move(response));
}

HttpResponse ReplayTransport::get(const std::string& url) {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = responses_.find(url);
  if (it == responses_.end()) {
    throw std::out_of_range("no recorded response for " + url);
  }
  // Repeating the last response lets a single recording serve retry loops.
  std::size_t& cursor = cursor_[url];
  const HttpResponse& response = it->second[std::min(cursor, it->second.size() - 1)];
  ++cursor;
  return response;
}

HttpResponse RecordingTransport::get(const std::string& url) {
  HttpResponse response = inner_.get(url);
  std::lock_guard<std::mutex> lock(mutex_);
  exchanges_.emplace_back(url, response);
  return response;
}

void RecordingTransport::save(const std::string& path) const {
  json doc;
  doc["exchanges"] = json::array();
  std::lock_guard<std::mutex> lock(mutex_);
  for (const auto& [url, response] : exchanges_) {
    doc["exchanges"].push_back({{"url", url}, {"status", response.status}, {"body", response.body}});
  }
  write_file(path, doc.dump(2) + "\n");
}

LiveTransport::LiveTransport(std::string auth_token) : auth_token_(std::move(auth_token)) {}

HttpResponse LiveTransport::get(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw std::invalid_argument("url without scheme: " + url);
  }
  auto host_end = url.find('/', scheme_end + 3);
  std::string origin = host_end == std::string::npos ? url : url.substr(0, host_end);
  std::string path = host_end == std::string::npos ? "/" : url.substr(host_end);

  httplib::Client client(origin);
  client.set_follow_location(true);
  client.set_connection_timeout(30);
  client.set_read_timeout(60);

  httplib::Headers headers{{"Accept", "application/vnd.github.raw+json"},
                           {"X-GitHub-Api-Version", "2022-11-28"},
                           {"User-Agent", "skillkit"}};
  if (!auth_token_.empty()) {
    headers.emplace("Authorization", "Bearer " + auth_token_);
  }

  auto result = client.Get(path, headers);
  if (!result) {
    throw std::runtime_error("network error fetching " + url + ": " +
                             httplib::to_string(result.error()));
  }
  return {result->status, result->body};
}

GithubClient::GithubClient(Transport& transport, RetryPolicy retry, SleepFn sleep)
    : transport_(transport), retry_(retry), sleep_(std::move(sleep)) {
  if (!sleep_) {
    sleep_ = [](int ms) { std::this_thread::sleep_for(std::chrono::milliseconds(ms)); };
  }
}

HttpResponse GithubClient::get_with_retry(const std::string& url) {
  HttpResponse response;
  for (int attempt = 1; attempt <= retry_.max_attempts; ++attempt) {
    response = transport_.get(url);
    if (response.status == 200) {
      return response;
    }
    bool retryable = response.status == 403 || response.status == 429 || response.status >= 500;
    if (!retryable) {
      throw std::runtime_error("http " + std::to_string(response.status) + " for " + url);
    }
    if (attempt < retry_.max_attempts) {
      long long delay = static_cast<long long>(retry_.base_delay_ms) << (attempt - 1);
      sleep_(static_cast<int>(std::min<long long>(delay, retry_.max_delay_ms)));
    }
  }
  if (response.status == 403 || response.status == 429) {
    throw RateLimitError("rate limited after " + std::to_string(retry_.max_attempts) +
                         " attempts: " + url);
  }
  throw std::runtime_error("http " + std::to_string(response.status) + " for " + url +
                           " after " + std::to_string(retry_.max_attempts) + " attempts");
}

std::vector<RepoRecord> GithubClient::repo_search(const std::string& query) {
  std::vector<RepoRecord> repos;
  for (std::size_t page = 1; page <= kMaxPages; ++page) {
    std::string url = std::string(kApiBase) + "/search/repositories?q=" + url_encode(query) +
                      "&per_page=" + std::to_string(kPerPage) + "&page=" + std::to_string(page);
    json doc = parse_body(get_with_retry(url).body, url);
    const json& items = doc.at("items");
    for (const auto& item : items) {
      RepoRecord repo;
      repo.full_name = item.value("full_name", "");
      repo.url = item.value("html_url", "");
      if (item.contains("license") && item["license"].is_object()) {
        repo.license = item["license"].value("spdx_id", "");
      }
      repos.push_back(std::move(repo));
    }
    if (items.size() < kPerPage) {
      break;
    }
  }
  return repos;
}

std::vector<RemoteFileRef> GithubClient::code_search(const std::string& token,
                                                     const std::vector<std::string>& extensions) {
  std::vector<RemoteFileRef> refs;
  for (std::size_t page = 1; page <= kMaxPages; ++page) {
    std::string url = std::string(kApiBase) + "/search/code?q=" + url_encode(token) +
                      "&per_page=" + std::to_string(kPerPage) + "&page=" + std::to_string(page);
    json doc = parse_body(get_with_retry(url).body, url);
    const json& items = doc.at("items");
    for (const auto& item : items) {
      std::string path = item.value("path", "");
      if (!has_extension(path, extensions)) {
        continue;
      }
      RemoteFileRef ref;
      ref.path = path;
      ref.url = item.value("html_url", "");
      ref.raw_url = item.value("url", "");
      if (item.contains("repository") && item["repository"].is_object()) {
        ref.repo = item["repository"].value("full_name", "");
      }
      refs.push_back(std::move(ref));
    }
    if (items.size() < kPerPage) {
      break;
    }
  }
  return refs;
}

std::string GithubClient::fetch_file(const RemoteFileRef& ref) {
  return get_with_retry(ref.raw_url).body;
}

std::vector<std::string> GithubClient::fetch_files(const std::vector<RemoteFileRef>& refs,
                                                   std::size_t concurrency) {
  if (concurrency == 0) {
    concurrency = 1;
  }
  std::vector<std::string> texts(refs.size());
  for (std::size_t base = 0; base < refs.size(); base += concurrency) {
    std::size_t count = std::min(concurrency, refs.size() - base);
    std::vector<std::future<std::string>> batch;
    batch.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      batch.push_back(std::async(std::launch::async,
                                 [this, &ref = refs[base + i]] { return fetch_file(ref); }));
    }
    for (std::size_t i = 0; i < count; ++i) {
      texts[base + i] = batch[i].get();
    }
  }
  return texts;
}

std::vector<std::string> collect_query_tokens(const std::vector<std::string>& texts,
                                              std::size_t min_count, double fraction,
                                              std::uint64_t seed) {
  std::map<std::string, std::size_t> counts;
  for (const auto& text : texts) {
    for (const auto& token : lex(text)) {
      if (token.kind == TokenKind::Identifier) {
        ++counts[std::string(token.text)];
      }
    }
  }
  std::vector<std::string> frequent;
  for (const auto& [name, count] : counts) {
    if (count > min_count) {
      frequent.push_back(name);
    }
  }
  auto k = static_cast<std::size_t>(std::llround(static_cast<double>(frequent.size()) * fraction));
  k = std::min(k, frequent.size());
  Rng rng(seed);
  return rng.sample(frequent, k);  // sampling preserves the sorted order
}

const std::vector<std::string>& url_blacklist() {
  static const std::vector<std::string> keywords{"dotnet", "-ms",   "microsoft", ".net",
                                                 "solaris", "unity", "logs",      "www"};
  return keywords;
}

const std::vector<std::string>& content_blacklist() {
  static const std::vector<std::string> directives{".assembly", ".NET",   ".class", ".method",
                                                   ".string",   ".float", ".inline"};
  return directives;
}

namespace {

// A directive only counts when a whitespace byte sits right before it, the
// shape it has in disassembly listings rather than inside prose or names.
bool contains_directive(const std::string& text, const std::string& directive) {
  std::size_t pos = text.find(directive);
  while (pos != std::string::npos) {
    if (pos > 0 && is_space_byte(text[pos - 1])) {
      return true;
    }
    pos = text.find(directive, pos + 1);
  }
  return false;
}

const std::string* match_url_keyword(const std::string& url) {
  std::string lowered = to_lower(url);
  for (const auto& keyword : url_blacklist()) {
    if (lowered.find(keyword) != std::string::npos) {
      return &keyword;
    }
  }
  return nullptr;
}

const std::string* match_content_directive(const std::string& text) {
  for (const auto& directive : content_blacklist()) {
    if (contains_directive(text, directive)) {
      return &directive;
    }
  }
  return nullptr;
}

}  // namespace

UrlFilterOutcome filter_urls(const std::vector<RemoteFileRef>& refs) {
  UrlFilterOutcome outcome;
  for (const auto& ref : refs) {
    if (const std::string* hit = match_url_keyword(ref.url)) {
      outcome.rejections.push_back({ref.url, "url", *hit});
    } else {
      outcome.kept.push_back(ref);
    }
  }
  return outcome;
}

FilterOutcome filter_candidates(const std::vector<CandidateFile>& candidates) {
  FilterOutcome outcome;
  for (const auto& candidate : candidates) {
    if (const std::string* hit = match_url_keyword(candidate.ref.url)) {
      outcome.rejections.push_back({candidate.ref.url, "url", *hit});
      continue;
    }
    if (const std::string* hit = match_content_directive(candidate.text)) {
      outcome.rejections.push_back({candidate.ref.url, "content", *hit});
      continue;
    }
    outcome.kept.push_back(candidate);
  }
  return outcome;
}

namespace {

void append_jsonl(const std::string& path, const json& record) {
  std::filesystem::create_directories(std::filesystem::path(path).parent_path());
  std::ofstream stream(path, std::ios::binary | std::ios::app);
  stream << record.dump() << "\n";
}

}  // namespace

MineRemoteResult mine_remote(GithubClient& client, const std::vector<std::string>& corpus_texts,
                             const MineRemoteOptions& options) {
  MineRemoteResult result;
  std::set<std::string> done_tokens;
  std::set<std::string> seen_urls;

  std::string checkpoint_path =
      options.out_dir.empty() ? "" : options.out_dir + "/checkpoint.json";
  if (!checkpoint_path.empty() && std::filesystem::exists(checkpoint_path)) {
    json checkpoint = json::parse(read_file(checkpoint_path));
    for (const auto& token : checkpoint.value("done_tokens", json::array())) {
      done_tokens.insert(token.get<std::string>());
    }
    for (const auto& url : checkpoint.value("seen_urls", json::array())) {
      seen_urls.insert(url.get<std::string>());
    }
  }
  auto save_checkpoint = [&] {
    if (checkpoint_path.empty()) {
      return;
    }
    json checkpoint;
    checkpoint["done_tokens"] = done_tokens;
    checkpoint["seen_urls"] = seen_urls;
    write_file(checkpoint_path, checkpoint.dump(2) + "\n");
  };

  result.repos = client.repo_search(options.repo_query);
  std::sort(result.repos.begin(), result.repos.end(),
            [](const RepoRecord& a, const RepoRecord& b) { return a.full_name < b.full_name; });
  if (!options.out_dir.empty()) {
    std::string lines;
    for (const auto& repo : result.repos) {
      lines += json{{"full_name", repo.full_name}, {"license", repo.license}, {"url", repo.url}}
                   .dump() +
               "\n";
    }
    write_file(options.out_dir + "/repos.jsonl", lines);
  }

  std::vector<std::string> tokens = collect_query_tokens(
      corpus_texts, options.min_token_count, options.token_fraction, options.seed);

  for (const auto& token : tokens) {
    if (done_tokens.count(token)) {
      ++result.tokens_skipped;
      continue;
    }
    std::vector<RemoteFileRef> refs = client.code_search(token, options.extensions);
    std::vector<RemoteFileRef> fresh;
    for (auto& ref : refs) {
      if (seen_urls.insert(ref.url).second) {
        fresh.push_back(std::move(ref));
      }
    }
    // The url stage runs before fetching; only survivors cost a download.
    UrlFilterOutcome url_stage = filter_urls(fresh);
    std::vector<std::string> texts = client.fetch_files(url_stage.kept, options.concurrency);

    std::vector<CandidateFile> candidates;
    candidates.reserve(url_stage.kept.size());
    for (std::size_t i = 0; i < url_stage.kept.size(); ++i) {
      candidates.push_back({url_stage.kept[i], texts[i]});
    }
    FilterOutcome outcome = filter_candidates(candidates);
    outcome.rejections.insert(outcome.rejections.begin(), url_stage.rejections.begin(),
                              url_stage.rejections.end());

    if (!options.out_dir.empty()) {
      for (const auto& kept : outcome.kept) {
        std::string name = content_hash(kept.ref.url).substr(0, 12) + "_" +
                           sanitize_filename(basename_of(kept.ref.path));
        write_file(options.out_dir + "/files/" + name, kept.text);
        append_jsonl(options.out_dir + "/mined.jsonl",
                     json{{"file", "files/" + name},
                          {"path", kept.ref.path},
                          {"repo", kept.ref.repo},
                          {"url", kept.ref.url}});
      }
      for (const auto& rejection : outcome.rejections) {
        append_jsonl(options.out_dir + "/rejections.jsonl",
                     json{{"keyword", rejection.keyword},
                          {"stage", rejection.stage},
                          {"url", rejection.url}});
      }
    }

    std::move(outcome.kept.begin(), outcome.kept.end(), std::back_inserter(result.files));
    std::move(outcome.rejections.begin(), outcome.rejections.end(),
              std::back_inserter(result.rejections));
    ++result.tokens_queried;
    done_tokens.insert(token);
    save_checkpoint();
  }

  return result;
}

}  // namespace skillkit
