// SPDX-License-Identifier: Apache-2.0
#include "../support/fixtures.hpp"

#include "vaxstance/ingest.hpp"

#include <doctest.h>

#include <atomic>
#include <mutex>

using namespace vaxstance;
namespace vt = vaxstance::testing;

namespace {

// In-memory stand-in for the platform API. Every month has `videos_per_month`
// videos; each video has two pages of threads, and each thread has three
// replies of which only one is embedded, forcing a reply-page fetch.
class FakePlatform final : public PlatformClient {
 public:
  int videos_per_month = 3;
  int fail_on_call = 0;  // 1-based call number that answers with `failure`
  int fail_times = 1;
  json failure = json{{"error", {{"code", 403}, {"reason", "quotaExceeded"}}}};
  std::set<std::string> comments_disabled;
  std::atomic<int> calls{0};

  json request(const std::string& endpoint, const RequestParams& p) override {
    const int n = ++calls;
    {
      std::lock_guard lock(mu_);
      log_.push_back(endpoint);
    }
    if (fail_on_call > 0 && n >= fail_on_call && n < fail_on_call + fail_times) {
      raise_platform_error(failure["error"]["code"].get<int>(), failure);
    }
    if (endpoint == "search") {
      const auto month = p.at("publishedAfter").substr(0, 7);
      json items = json::array();
      for (int i = 0; i < videos_per_month; ++i) {
        items.push_back({{"id", {{"kind", "youtube#video"}, {"videoId", "vid" + month + "_" + std::to_string(i)}}}});
      }
      // The platform sometimes over-delivers; the client must cap.
      items.push_back({{"id", {{"videoId", "extra" + month}}}});
      return {{"items", items}};
    }
    if (endpoint == "videos") {
      json items = json::array();
      std::string ids = p.at("id");
      std::size_t start = 0;
      while (start <= ids.size()) {
        const auto end = ids.find(',', start);
        const auto id = ids.substr(start, end == std::string::npos ? std::string::npos : end - start);
        const auto month = id.substr(id.find("vid") == 0 ? 3 : 5, 7);
        items.push_back({{"id", id},
                         {"snippet",
                          {{"channelId", "UC" + month},
                           {"channelTitle", "Canal " + month},
                           {"title", "Vacina da gripe " + id},
                           {"publishedAt", month + "-10T12:00:00Z"}}},
                         {"statistics", {{"viewCount", "1000"}, {"likeCount", "10"}}}});
        if (end == std::string::npos) break;
        start = end + 1;
      }
      return {{"items", items}};
    }
    if (endpoint == "commentThreads") {
      const auto video = p.at("videoId");
      if (comments_disabled.count(video)) {
        raise_platform_error(403, json{{"error", {{"code", 403}, {"reason", "commentsDisabled"}}}});
      }
      const bool second = p.count("pageToken") > 0;
      json items = json::array();
      for (int t = 0; t < 2; ++t) {
        const auto tid = video + (second ? "_t2" : "_t1") + std::to_string(t);
        items.push_back({{"id", tid},
                         {"snippet",
                          {{"totalReplyCount", 3},
                           {"topLevelComment", comment_json(tid, "2020-01-02T00:00:00Z")}}},
                         {"replies", {{"comments", json::array({comment_json(tid + "_r0", "2020-01-03T00:00:00Z")})}}}});
      }
      json page{{"items", items}};
      if (!second) page["nextPageToken"] = "p2";
      return page;
    }
    if (endpoint == "comments") {
      const auto parent = p.at("parentId");
      json items = json::array();
      for (int r = 0; r < 3; ++r) {
        items.push_back(comment_json(parent + "_r" + std::to_string(r), "2020-01-03T00:00:00Z"));
      }
      return {{"items", items}};
    }
    throw Error(ErrorKind::kGeneric, "unexpected endpoint " + endpoint);
  }

  std::vector<std::string> log() const {
    std::lock_guard lock(mu_);
    return log_;
  }

 private:
  static json comment_json(const std::string& id, const std::string& at) {
    return {{"id", id},
            {"snippet",
             {{"authorChannelId", {{"value", "author_" + id.substr(0, 4)}}},
              {"textOriginal", "texto de " + id},
              {"publishedAt", at},
              {"likeCount", 2}}}};
  }

  mutable std::mutex mu_;
  std::vector<std::string> log_;
};

QuerySpec spec_for(int year, unsigned month, int max_results = 50) {
  QuerySpec s;
  s.keyword = "gripe";
  s.tmpl = "Vacina {kw} obrigatória";
  s.month = {year, month};
  s.max_results = max_results;
  return s;
}

RetryPolicy instant_retry(std::vector<std::chrono::milliseconds>* delays = nullptr) {
  RetryPolicy r;
  r.max_attempts = 3;
  r.initial_backoff = std::chrono::milliseconds(100);
  r.sleep = [delays](std::chrono::milliseconds d) {
    if (delays) delays->push_back(d);
  };
  return r;
}

}  // namespace

TEST_SUITE("ingest") {

TEST_CASE("query expansion counts and order") {
  const auto templates = load_templates(default_templates_path());
  CHECK(templates.size() == 7);
  const auto lex = parse_lexicon(R"({"A": ["gripe", "influenza"], "B": ["sarampo", "GRIPE", {"variant": "x", "provisional": true}]})");
  const auto kws = lexicon_keywords(lex);
  CHECK(kws == std::vector<std::string>{"gripe", "influenza", "sarampo"});

  const auto two = parse_lexicon(R"({"A": ["gripe"], "B": ["sarampo"]})");
  const std::vector<std::string> tmpls{"Vacina {kw}", "Perigos {kw}"};
  const auto specs = expand_queries(two, tmpls, MonthRange{{2020, 1}, {2020, 3}});
  REQUIRE(specs.size() == 12);
  CHECK(specs[0].query() == "Vacina gripe");
  CHECK(specs[0].month == YearMonth{2020, 1});
  CHECK(specs[2].month == YearMonth{2020, 3});
  CHECK(specs[3].tmpl == "Perigos {kw}");
  CHECK(specs[6].keyword == "sarampo");
  std::set<std::string> keys;
  for (const auto& s : specs) keys.insert(s.cell_key());
  CHECK(keys.size() == 12);

  const std::vector<std::string> bad{"no slot"};
  CHECK_THROWS_AS(expand_queries(two, bad, MonthRange{{2020, 1}, {2020, 1}}), Error);
  const std::vector<std::string> twice{"{kw} {kw}"};
  CHECK_THROWS_AS(expand_queries(two, twice, MonthRange{{2020, 1}, {2020, 1}}), Error);
}

TEST_CASE("fetch_month walks search, details, thread pages and reply pages") {
  FakePlatform api;
  const auto r = fetch_month(spec_for(2020, 1, 3), api);
  CHECK(r.videos.size() == 3);
  CHECK(r.channels.size() == 1);
  // 3 videos x 2 pages x 2 threads, each with 3 replies fetched separately.
  CHECK(r.comments.size() == 3 * 2 * 2 * 4);
  std::size_t replies = 0;
  for (const auto& c : r.comments) replies += c.parent_id.has_value();
  CHECK(replies == 3 * 2 * 2 * 3);
  CHECK(r.videos[0].view_count == 1000);
  const auto log = api.log();
  CHECK(log[0] == "search");
  CHECK(log[1] == "videos");
}

TEST_CASE("fetch_month caps results and handles empty months") {
  FakePlatform api;
  CHECK(fetch_month(spec_for(2020, 1, 2), api).videos.size() == 2);
  api.videos_per_month = 0;
  api.calls = 0;
  const auto empty = fetch_month(spec_for(2020, 2), api);
  CHECK(empty.videos.size() == 1);  // only the over-delivered extra

  FakePlatform none;
  none.videos_per_month = 0;
  const auto r = fetch_month(spec_for(2020, 2, 0), none);
  CHECK(r.videos.empty());
  CHECK(none.calls == 1);
}

TEST_CASE("quota error mid-cell is retryable and discards the cell") {
  FakePlatform api;
  api.fail_on_call = 2;
  try {
    fetch_month(spec_for(2020, 1, 3), api);
    FAIL("expected quota error");
  } catch (const HttpStatusError& e) {
    CHECK(e.kind() == ErrorKind::kRetryable);
    CHECK(e.status() == 403);
  }

  // Retried as a whole cell, the second attempt succeeds.
  FakePlatform again;
  again.fail_on_call = 2;
  std::vector<std::chrono::milliseconds> delays;
  IngestStore store;
  const std::vector<QuerySpec> specs{spec_for(2020, 1, 3)};
  const auto summary = run_ingest(specs, again, store, {1, instant_retry(&delays)});
  CHECK(summary.failures.empty());
  CHECK(summary.fetched == 1);
  CHECK(delays.size() == 1);
  CHECK(store.comments().size() == 48);
}

TEST_CASE("persistent failures are reported per cell") {
  FakePlatform api;
  api.fail_on_call = 1;
  api.fail_times = 1000;
  IngestStore store;
  const std::vector<QuerySpec> specs{spec_for(2020, 1), spec_for(2020, 2)};
  const auto summary = run_ingest(specs, api, store, {2, instant_retry()});
  CHECK(summary.failures.size() == 2);
  CHECK(summary.failures[0].kind == ErrorKind::kRetryable);
  CHECK(store.completed_cells().empty());

  FakePlatform forbidden;
  forbidden.fail_on_call = 1;
  forbidden.fail_times = 1000;
  forbidden.failure = json{{"error", {{"code", 400}, {"reason", "badRequest"}}}};
  const auto s2 = run_ingest(specs, forbidden, store, {1, instant_retry()});
  CHECK(s2.failures.size() == 2);
  CHECK(s2.failures[0].kind == ErrorKind::kGeneric);
  CHECK(forbidden.calls == 2);  // not retried
}

TEST_CASE("comments disabled on one video does not fail the cell") {
  FakePlatform api;
  api.comments_disabled.insert("vid2020-01_1");
  const auto r = fetch_month(spec_for(2020, 1, 3), api);
  CHECK(r.videos.size() == 3);
  CHECK(r.comments.size() == 2 * 2 * 2 * 4);
}

TEST_CASE("ingest is deterministic, resumable and deduplicating") {
  auto overlap = spec_for(2020, 1, 2);
  overlap.tmpl = "Perigos da vacina {kw}";
  const std::vector<QuerySpec> specs{spec_for(2020, 1, 3), spec_for(2020, 2, 3), overlap};
  const auto dir = vt::temp_dir("ingest_resume");
  FakePlatform a;
  IngestStore first;
  const auto s1 = run_ingest(specs, a, first, {3, instant_retry()});
  CHECK(s1.fetched == 3);
  // The third cell re-finds videos of the first; nothing is duplicated.
  CHECK(first.videos().size() == 6);
  first.save(dir, kDefaultWindow);

  FakePlatform serial;
  IngestStore second;
  run_ingest(specs, serial, second, {1, instant_retry()});
  CHECK(second.comments() == first.comments());
  CHECK(second.videos() == first.videos());

  auto reopened = IngestStore::open(dir);
  CHECK(reopened.completed_cells().size() == 3);
  FakePlatform idle;
  const auto s3 = run_ingest(specs, idle, reopened, {2, instant_retry()});
  CHECK(s3.skipped == 3);
  CHECK(idle.calls == 0);
  CHECK(reopened.comments().size() == first.comments().size());
}

TEST_CASE("post-retrieval title filter") {
  const auto lex = compile_lexicon(default_lexicon_path());
  const auto at = make_timestamp(2021, 1, 1);
  const std::vector<Video> vids{{"a", "c", "Vacina da GRIPE", at, 0, 0},
                                {"b", "c", "Receita de bolo", at, 0, 0},
                                {"c", "c", "Sarampo volta", at, 0, 0}};
  const auto r = post_retrieval_title_filter(vids, lex);
  CHECK(r.kept.size() == 2);
  CHECK(r.dropped == 1);
  CHECK(r.kept[1].video_id == "c");
}

TEST_CASE("fixture replay and recording") {
  const auto dir = vt::temp_dir("fixtures");
  FakePlatform live;
  RecordingClient rec(live, dir);
  const auto recorded = fetch_month(spec_for(2020, 3, 2), rec);
  FixtureClient replay(dir);
  const auto replayed = fetch_month(spec_for(2020, 3, 2), replay);
  CHECK(replayed.comments == recorded.comments);
  try {
    fetch_month(spec_for(2020, 4, 2), replay);
    FAIL("missing recording accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kMissingInput);
  }
  CHECK(request_hash("search", {{"a", "1"}, {"b", "2"}}) == request_hash("search", {{"b", "2"}, {"a", "1"}}));
  CHECK(request_key("search", {{"b", "2"}, {"a", "1"}}) == "search?a=1&b=2");
}

TEST_CASE("platform error mapping") {
  auto kind_of = [](int status, const json& body) {
    try {
      raise_platform_error(status, body);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::kGeneric;
  };
  CHECK(kind_of(403, json{{"error", {{"errors", json::array({{{"reason", "quotaExceeded"}}})}}}}) ==
        ErrorKind::kRetryable);
  CHECK(kind_of(503, json{}) == ErrorKind::kRetryable);
  CHECK(kind_of(429, json{}) == ErrorKind::kRetryable);
  CHECK(kind_of(404, json{}) == ErrorKind::kMissingInput);
  CHECK(kind_of(400, json{}) == ErrorKind::kGeneric);
}

}  // TEST_SUITE
