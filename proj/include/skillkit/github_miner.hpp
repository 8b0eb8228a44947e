#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace skillkit {

struct HttpResponse {
  int status = 0;
  std::string body;
};

// Minimal HTTP GET seam so mining can run live, record its exchanges, or
// replay them offline byte for byte.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse get(const std::string& url) = 0;
};

class ReplayTransport : public Transport {
 public:
  ReplayTransport() = default;
  ReplayTransport(ReplayTransport&& other) noexcept;
  ReplayTransport& operator=(ReplayTransport&& other) noexcept;

  static ReplayTransport from_file(const std::string& path);
  void add(const std::string& url, HttpResponse response);
  // Replays responses for a url in recorded order; throws std::out_of_range
  // for urls that were never recorded.
  HttpResponse get(const std::string& url) override;

 private:
  std::mutex mutex_;
  std::map<std::string, std::vector<HttpResponse>> responses_;
  std::map<std::string, std::size_t> cursor_;
};

class RecordingTransport : public Transport {
 public:
  explicit RecordingTransport(Transport& inner) : inner_(inner) {}
  HttpResponse get(const std::string& url) override;
  void save(const std::string& path) const;

 private:
  Transport& inner_;
  mutable std::mutex mutex_;
  std::vector<std::pair<std::string, HttpResponse>> exchanges_;
};

// Talks to the real API over TLS. The token, when set, is sent as a bearer
// authorization header.
class LiveTransport : public Transport {
 public:
  explicit LiveTransport(std::string auth_token = "");
  HttpResponse get(const std::string& url) override;

 private:
  std::string auth_token_;
};

struct RepoRecord {
  std::string full_name;
  std::string url;
  std::string license;  // spdx id or empty
};

struct RemoteFileRef {
  std::string url;      // html location: filtering and identity
  std::string raw_url;  // fetch location
  std::string repo;
  std::string path;
};

struct RetryPolicy {
  int max_attempts = 5;
  int base_delay_ms = 500;
  int max_delay_ms = 60000;
};

class RateLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GithubClient {
 public:
  using SleepFn = std::function<void(int)>;

  explicit GithubClient(Transport& transport, RetryPolicy retry = {}, SleepFn sleep = nullptr);

  std::vector<RepoRecord> repo_search(const std::string& query);
  // Paginated code search for one token, keeping only the given extensions.
  std::vector<RemoteFileRef> code_search(const std::string& token,
                                         const std::vector<std::string>& extensions);
  std::string fetch_file(const RemoteFileRef& ref);
  // Bounded-concurrency fetch; results come back in input order.
  std::vector<std::string> fetch_files(const std::vector<RemoteFileRef>& refs,
                                       std::size_t concurrency);

 private:
  // GET with bounded exponential backoff on rate limits and server errors.
  HttpResponse get_with_retry(const std::string& url);

  Transport& transport_;
  RetryPolicy retry_;
  SleepFn sleep_;
};

// Identifiers occurring more than min_count times across the corpus; a
// seeded fraction of them is sampled and returned sorted.
std::vector<std::string> collect_query_tokens(const std::vector<std::string>& texts,
                                              std::size_t min_count, double fraction,
                                              std::uint64_t seed);

struct CandidateFile {
  RemoteFileRef ref;
  std::string text;
};

struct Rejection {
  std::string url;
  std::string stage;  // "url" or "content"
  std::string keyword;
};

struct FilterOutcome {
  std::vector<CandidateFile> kept;
  std::vector<Rejection> rejections;
};

// Blacklist keywords matched case-insensitively anywhere in the file url.
const std::vector<std::string>& url_blacklist();
// Directives matched case-sensitively when preceded by whitespace; they mark
// disassembly listings and other non-SKILL uses of the extensions.
const std::vector<std::string>& content_blacklist();

struct UrlFilterOutcome {
  std::vector<RemoteFileRef> kept;
  std::vector<Rejection> rejections;
};

// Url stage alone, applied before any fetch so blacklisted refs never cost a
// network round trip.
UrlFilterOutcome filter_urls(const std::vector<RemoteFileRef>& refs);

// Two-stage filter: url keywords first, then content directives. Every
// rejection records the stage and keyword that fired.
FilterOutcome filter_candidates(const std::vector<CandidateFile>& candidates);

struct MineRemoteOptions {
  std::string repo_query = "cadence skill";
  std::vector<std::string> extensions{".il", ".ils"};
  std::size_t min_token_count = 10;
  double token_fraction = 0.2;
  std::uint64_t seed = 0;
  std::size_t concurrency = 4;
  std::string out_dir;  // outputs and the resume checkpoint land here
};

struct MineRemoteResult {
  std::vector<RepoRecord> repos;
  std::vector<CandidateFile> files;
  std::vector<Rejection> rejections;
  std::size_t tokens_queried = 0;
  std::size_t tokens_skipped = 0;  // already done per the checkpoint
};

// Full mining pass: repo search for context, token collection from the seed
// corpus, per-token code search, concurrent fetches, then filtering. A
// checkpoint in out_dir makes interrupted runs resumable.
MineRemoteResult mine_remote(GithubClient& client, const std::vector<std::string>& corpus_texts,
                             const MineRemoteOptions& options);

}  // namespace skillkit
