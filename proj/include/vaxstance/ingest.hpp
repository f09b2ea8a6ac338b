// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "vaxstance/corpus.hpp"
#include "vaxstance/error.hpp"
#include "vaxstance/lexicon.hpp"
#include "vaxstance/retry.hpp"
#include "vaxstance/timeutil.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace vaxstance {

using json = nlohmann::ordered_json;

/// One search cell: a keyword substituted into a template for one month.
struct QuerySpec {
  std::string keyword;
  std::string tmpl;  // contains exactly one "{kw}"
  YearMonth month;
  std::string region = "BR";
  std::string language = "pt";
  int max_results = 50;

  /// The template with the keyword substituted.
  std::string query() const;
  /// Stable identifier of the (keyword, template, month) cell.
  std::string cell_key() const;
};

inline constexpr std::string_view kKeywordSlot = "{kw}";

/// Reads one template per line, skipping blanks and '#' comments.
std::vector<std::string> load_templates(const std::filesystem::path& path);
std::filesystem::path default_templates_path();

/// Search keywords: every non-provisional variant in lexicon order, with
/// duplicates (after folding) removed.
std::vector<std::string> lexicon_keywords(const VaccineLexicon& lexicon);

/// Cartesian product keyword x template x month, in that nesting order.
/// Throws unless every template has exactly one {kw} slot.
std::vector<QuerySpec> expand_queries(const VaccineLexicon& lexicon,
                                      std::span<const std::string> templates,
                                      const MonthRange& window, int max_results = 50);

/// A non-success HTTP answer from the platform.
class HttpStatusError : public Error {
 public:
  HttpStatusError(ErrorKind kind, int status, const std::string& what)
      : Error(kind, what), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

using RequestParams = std::map<std::string, std::string>;

/// Transport to the video platform's data API. `endpoint` is the resource
/// name ("search", "videos", "commentThreads", "comments"). Quota
/// exhaustion must surface as a retryable HttpStatusError.
class PlatformClient {
 public:
  virtual ~PlatformClient() = default;
  virtual json request(const std::string& endpoint, const RequestParams& params) = 0;
};

/// "endpoint?k=v&..." with keys sorted; the identity of a request.
std::string request_key(const std::string& endpoint, const RequestParams& params);
/// 16 hex digits of a 64-bit hash of request_key().
std::string request_hash(const std::string& endpoint, const RequestParams& params);

/// Replays recorded responses: <dir>/<request_hash>.json. A recorded body of
/// the form {"error": {"code": N, "reason": "..."}} is raised as the
/// matching error. A missing recording is a missing-input error.
class FixtureClient final : public PlatformClient {
 public:
  explicit FixtureClient(std::filesystem::path dir);
  json request(const std::string& endpoint, const RequestParams& params) override;

 private:
  std::filesystem::path dir_;
};

/// Writes every successful response of `inner` into a fixture directory.
class RecordingClient final : public PlatformClient {
 public:
  RecordingClient(PlatformClient& inner, std::filesystem::path dir);
  json request(const std::string& endpoint, const RequestParams& params) override;

 private:
  PlatformClient& inner_;
  std::filesystem::path dir_;
  std::mutex mu_;
};

/// Thin HTTPS client for the public data API. The key is passed in, never
/// read from config; see api_key_from_env().
class HttpPlatformClient final : public PlatformClient {
 public:
  HttpPlatformClient(std::string base_url, std::string api_key);
  json request(const std::string& endpoint, const RequestParams& params) override;

 private:
  std::string host_;    // scheme://host[:port]
  std::string prefix_;  // path prefix, e.g. /youtube/v3
  std::string api_key_;
};

/// Reads YOUTUBE_API_KEY; throws a validation error when unset.
std::string api_key_from_env();

/// Maps an error body + status to the pipeline's error kinds.
[[noreturn]] void raise_platform_error(int status, const json& body);

struct FetchResult {
  QuerySpec spec;
  std::vector<Channel> channels;
  std::vector<Video> videos;
  std::vector<Comment> comments;
};

/// Fetches the top `max_results` videos for one cell, their metadata and
/// every comment page, including all reply pages. All-or-nothing: any
/// failure discards what was fetched for the cell and propagates.
FetchResult fetch_month(const QuerySpec& spec, PlatformClient& client);

/// Keeps videos whose title names at least one lexicon variant.
struct TitleFilterResult {
  std::vector<Video> kept;
  std::size_t dropped = 0;
};
TitleFilterResult post_retrieval_title_filter(std::span<const Video> videos,
                                              const CompiledLexicon& lexicon);

/// Deduplicating single-writer sink for fetched cells. The first record
/// seen for an id wins; a later record that differs is logged and ignored.
/// Tracks completed cells so reruns skip them.
class IngestStore {
 public:
  IngestStore() = default;

  /// Loads a previous run's output (corpus files + ingest_state.json) when
  /// present.
  static IngestStore open(const std::filesystem::path& dir);

  void merge(const FetchResult& result);
  bool is_complete(const std::string& cell_key) const;
  std::size_t conflicts() const noexcept { return conflicts_; }

  const std::vector<Channel>& channels() const noexcept { return channels_; }
  const std::vector<Video>& videos() const noexcept { return videos_; }
  const std::vector<Comment>& comments() const noexcept { return comments_; }
  const std::set<std::string>& completed_cells() const noexcept { return completed_; }

  /// Writes the corpus files and ingest_state.json.
  void save(const std::filesystem::path& dir, const MonthRange& window) const;

 private:
  template <typename T>
  void add(std::vector<T>& items, std::unordered_map<std::string, std::size_t>& index,
           const std::string& id, const T& item, const char* kind);

  std::vector<Channel> channels_;
  std::vector<Video> videos_;
  std::vector<Comment> comments_;
  std::unordered_map<std::string, std::size_t> channel_index_;
  std::unordered_map<std::string, std::size_t> video_index_;
  std::unordered_map<std::string, std::size_t> comment_index_;
  std::set<std::string> completed_;
  std::size_t conflicts_ = 0;
};

struct IngestOptions {
  int parallelism = 4;
  RetryPolicy retry;
};

struct CellFailure {
  std::string cell_key;
  ErrorKind kind = ErrorKind::kGeneric;
  std::string message;
};

struct IngestSummary {
  std::size_t cells = 0;
  std::size_t skipped = 0;  // already complete
  std::size_t fetched = 0;
  std::vector<CellFailure> failures;
};

/// Runs every cell not yet complete in `store`. Cells are fetched by up to
/// `parallelism` workers and merged strictly in spec order by the calling
/// thread, so the stored result does not depend on scheduling. Each cell is
/// retried as a whole on retryable errors.
IngestSummary run_ingest(std::span<const QuerySpec> specs, PlatformClient& client,
                         IngestStore& store, const IngestOptions& options = {});

}  // namespace vaxstance
