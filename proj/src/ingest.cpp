// SPDX-License-Identifier: Apache-2.0
#include "vaxstance/ingest.hpp"

#include "vaxstance/hashing.hpp"
#include "vaxstance/jsonl.hpp"
#include "vaxstance/text.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <atomic>
#include <condition_variable>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_set>

namespace vaxstance {

namespace fs = std::filesystem;

std::string QuerySpec::query() const {
  std::string q = tmpl;
  const auto pos = q.find(kKeywordSlot);
  if (pos != std::string::npos) q.replace(pos, kKeywordSlot.size(), keyword);
  return q;
}

std::string QuerySpec::cell_key() const {
  return keyword + "|" + tmpl + "|" + month.to_string();
}

std::vector<std::string> load_templates(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    out.push_back(line.substr(first, line.find_last_not_of(" \t") - first + 1));
  }
  return out;
}

fs::path default_templates_path() { return fs::path(VAXSTANCE_DATA_DIR) / "query_templates.txt"; }

std::vector<std::string> lexicon_keywords(const VaccineLexicon& lexicon) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& entry : lexicon.entries) {
    for (const auto& v : entry.variants) {
      if (v.provisional) continue;
      if (seen.insert(text::fold(v.text)).second) out.push_back(v.text);
    }
  }
  return out;
}

std::vector<QuerySpec> expand_queries(const VaccineLexicon& lexicon,
                                      std::span<const std::string> templates,
                                      const MonthRange& window, int max_results) {
  if (templates.empty()) throw validation_error("no query templates");
  for (const auto& t : templates) {
    const auto first = t.find(kKeywordSlot);
    if (first == std::string::npos || t.find(kKeywordSlot, first + 1) != std::string::npos) {
      throw validation_error("template must contain exactly one {kw}: '" + t + "'");
    }
  }
  if (max_results < 1) throw validation_error("max_results must be positive");
  const auto months = window.months();
  std::vector<QuerySpec> specs;
  for (const auto& kw : lexicon_keywords(lexicon)) {
    for (const auto& t : templates) {
      for (const auto& m : months) {
        QuerySpec s;
        s.keyword = kw;
        s.tmpl = t;
        s.month = m;
        s.max_results = max_results;
        specs.push_back(std::move(s));
      }
    }
  }
  return specs;
}

std::string request_key(const std::string& endpoint, const RequestParams& params) {
  std::string key = endpoint + "?";
  bool first = true;
  for (const auto& [k, v] : params) {
    if (!first) key += "&";
    first = false;
    key += k + "=" + v;
  }
  return key;
}

std::string request_hash(const std::string& endpoint, const RequestParams& params) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(request_key(endpoint, params))));
  return buf;
}

void raise_platform_error(int status, const json& body) {
  std::string reason;
  std::string message;
  if (body.is_object() && body.contains("error")) {
    const auto& err = body["error"];
    if (err.is_object()) {
      message = err.value("message", std::string());
      reason = err.value("reason", std::string());
      if (reason.empty() && err.contains("errors") && err["errors"].is_array() &&
          !err["errors"].empty()) {
        reason = err["errors"][0].value("reason", std::string());
      }
    }
  }
  const std::string what = "platform HTTP " + std::to_string(status) +
                           (reason.empty() ? "" : " (" + reason + ")") +
                           (message.empty() ? "" : ": " + message);
  const bool quota = reason == "quotaExceeded" || reason == "rateLimitExceeded" ||
                     reason == "dailyLimitExceeded" || reason == "userRateLimitExceeded";
  if (quota || status == 429 || status >= 500) {
    throw HttpStatusError(ErrorKind::kRetryable, status, what);
  }
  if (status == 404) throw HttpStatusError(ErrorKind::kMissingInput, status, what);
  throw HttpStatusError(ErrorKind::kGeneric, status, what);
}

FixtureClient::FixtureClient(fs::path dir) : dir_(std::move(dir)) {
  if (!fs::is_directory(dir_)) throw missing_input("fixture directory " + dir_.string());
}

json FixtureClient::request(const std::string& endpoint, const RequestParams& params) {
  const auto path = dir_ / (request_hash(endpoint, params) + ".json");
  if (!fs::exists(path)) {
    throw missing_input("no recorded response for " + request_key(endpoint, params) + " (" +
                        path.filename().string() + ")");
  }
  auto body = read_json_file(path);
  if (body.is_object() && body.contains("error")) {
    raise_platform_error(body["error"].value("code", 500), body);
  }
  return body;
}

RecordingClient::RecordingClient(PlatformClient& inner, fs::path dir)
    : inner_(inner), dir_(std::move(dir)) {}

json RecordingClient::request(const std::string& endpoint, const RequestParams& params) {
  auto body = inner_.request(endpoint, params);
  std::lock_guard lock(mu_);
  write_json_file(dir_ / (request_hash(endpoint, params) + ".json"), body);
  return body;
}

HttpPlatformClient::HttpPlatformClient(std::string base_url, std::string api_key)
    : api_key_(std::move(api_key)) {
  const auto scheme = base_url.find("://");
  if (scheme == std::string::npos) throw validation_error("base URL needs a scheme: " + base_url);
  const auto path = base_url.find('/', scheme + 3);
  host_ = base_url.substr(0, path);
  prefix_ = path == std::string::npos ? "" : base_url.substr(path);
  while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
}

json HttpPlatformClient::request(const std::string& endpoint, const RequestParams& params) {
  httplib::Client client(host_);
  client.set_connection_timeout(std::chrono::seconds(10));
  client.set_read_timeout(std::chrono::seconds(60));
  httplib::Params query(params.begin(), params.end());
  query.emplace("key", api_key_);
  auto res = client.Get(prefix_ + "/" + endpoint, query, httplib::Headers{});
  if (!res) {
    throw Error(ErrorKind::kRetryable,
                "platform request failed: " + httplib::to_string(res.error()));
  }
  json body;
  try {
    body = json::parse(res->body);
  } catch (const json::exception&) {
    if (res->status == 200) throw validation_error("platform returned non-JSON body");
  }
  if (res->status != 200) raise_platform_error(res->status, body);
  return body;
}

std::string api_key_from_env() {
  if (const char* key = std::getenv("YOUTUBE_API_KEY"); key && *key) return key;
  throw validation_error("YOUTUBE_API_KEY is not set");
}

namespace {

std::int64_t count_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return 0;
  if (it->is_string()) return std::stoll(it->get<std::string>());
  return it->get<std::int64_t>();
}

std::string author_of(const json& snippet) {
  if (auto it = snippet.find("authorChannelId"); it != snippet.end() && it->is_object()) {
    return it->value("value", std::string());
  }
  return snippet.value("authorDisplayName", std::string());
}

std::string text_of(const json& snippet) {
  if (auto it = snippet.find("textOriginal"); it != snippet.end()) return it->get<std::string>();
  return snippet.value("textDisplay", std::string());
}

Comment comment_from_api(const json& item, const std::string& video_id,
                         std::optional<std::string> parent_id, std::int64_t reply_count) {
  const auto& snippet = item.at("snippet");
  Comment c;
  c.comment_id = item.at("id").get<std::string>();
  c.video_id = video_id;
  c.author_id = author_of(snippet);
  c.parent_id = std::move(parent_id);
  c.text = text_of(snippet);
  c.published_at = parse_rfc3339(snippet.at("publishedAt").get<std::string>());
  c.like_count = count_field(snippet, "likeCount");
  c.reply_count = reply_count;
  return c;
}

// Follows nextPageToken until the listing is exhausted.
template <typename Fn>
void for_each_page(PlatformClient& client, const std::string& endpoint, RequestParams params,
                   Fn&& on_page) {
  std::set<std::string> seen_tokens;
  while (true) {
    const auto page = client.request(endpoint, params);
    on_page(page);
    auto it = page.find("nextPageToken");
    if (it == page.end() || !it->is_string() || it->get<std::string>().empty()) break;
    const auto token = it->get<std::string>();
    if (!seen_tokens.insert(token).second) {
      throw validation_error(endpoint + ": page token repeated: " + token);
    }
    params["pageToken"] = token;
  }
}

void fetch_comments(PlatformClient& client, const std::string& video_id,
                    std::vector<Comment>& out) {
  RequestParams params{{"part", "snippet,replies"},
                       {"videoId", video_id},
                       {"maxResults", "100"},
                       {"order", "time"},
                       {"textFormat", "plainText"}};
  for_each_page(client, "commentThreads", params, [&](const json& page) {
    for (const auto& thread : page.value("items", json::array())) {
      const auto& snippet = thread.at("snippet");
      const auto total_replies = count_field(snippet, "totalReplyCount");
      const auto top = comment_from_api(snippet.at("topLevelComment"), video_id, std::nullopt,
                                        total_replies);
      out.push_back(top);
      std::vector<json> embedded;
      if (auto r = thread.find("replies"); r != thread.end()) {
        for (const auto& c : r->value("comments", json::array())) embedded.push_back(c);
      }
      if (static_cast<std::int64_t>(embedded.size()) >= total_replies) {
        for (const auto& c : embedded) out.push_back(comment_from_api(c, video_id, top.comment_id, 0));
        continue;
      }
      // The thread listing only embeds a few replies; page through the rest.
      RequestParams reply_params{{"part", "snippet"},
                                 {"parentId", top.comment_id},
                                 {"maxResults", "100"},
                                 {"textFormat", "plainText"}};
      for_each_page(client, "comments", reply_params, [&](const json& replies) {
        for (const auto& c : replies.value("items", json::array())) {
          out.push_back(comment_from_api(c, video_id, top.comment_id, 0));
        }
      });
    }
  });
}

}  // namespace

FetchResult fetch_month(const QuerySpec& spec, PlatformClient& client) {
  FetchResult result;
  result.spec = spec;
  const RequestParams search{{"part", "snippet"},
                             {"q", spec.query()},
                             {"type", "video"},
                             {"order", "relevance"},
                             {"regionCode", spec.region},
                             {"relevanceLanguage", spec.language},
                             {"publishedAfter", format_rfc3339(spec.month.start())},
                             {"publishedBefore", format_rfc3339(spec.month.next().start())},
                             {"maxResults", std::to_string(spec.max_results)}};
  const auto found = client.request("search", search);
  std::vector<std::string> ids;
  for (const auto& item : found.value("items", json::array())) {
    if (static_cast<int>(ids.size()) >= spec.max_results) break;
    const auto& id = item.at("id");
    ids.push_back(id.is_object() ? id.at("videoId").get<std::string>() : id.get<std::string>());
  }
  if (ids.empty()) return result;

  std::string joined;
  for (const auto& id : ids) joined += (joined.empty() ? "" : ",") + id;
  const auto details = client.request("videos", {{"part", "snippet,statistics"}, {"id", joined}});
  std::unordered_set<std::string> channel_seen;
  for (const auto& item : details.value("items", json::array())) {
    const auto& snippet = item.at("snippet");
    Video v;
    v.video_id = item.at("id").get<std::string>();
    v.channel_id = snippet.at("channelId").get<std::string>();
    v.title = snippet.value("title", std::string());
    v.published_at = parse_rfc3339(snippet.at("publishedAt").get<std::string>());
    if (auto st = item.find("statistics"); st != item.end()) {
      v.view_count = count_field(*st, "viewCount");
      v.like_count = count_field(*st, "likeCount");
    }
    if (channel_seen.insert(v.channel_id).second) {
      result.channels.push_back({v.channel_id, snippet.value("channelTitle", std::string()),
                                 AnjStatus::kNotApplicable, ChannelType::kUnknown});
    }
    result.videos.push_back(std::move(v));
  }
  for (const auto& v : result.videos) {
    try {
      fetch_comments(client, v.video_id, result.comments);
    } catch (const HttpStatusError& e) {
      // Videos with comments turned off answer 403 commentsDisabled; they
      // simply contribute no comments.
      if (e.status() != 403 || std::string_view(e.what()).find("commentsDisabled") == std::string_view::npos) {
        throw;
      }
      spdlog::info("video {} has comments disabled", v.video_id);
    }
  }
  return result;
}

TitleFilterResult post_retrieval_title_filter(std::span<const Video> videos,
                                              const CompiledLexicon& lexicon) {
  TitleFilterResult r;
  for (const auto& v : videos) {
    if (lexicon.match(v.title).empty()) {
      ++r.dropped;
    } else {
      r.kept.push_back(v);
    }
  }
  return r;
}

IngestStore IngestStore::open(const fs::path& dir) {
  IngestStore store;
  if (fs::exists(dir / "comments.jsonl")) {
    const auto corpus = load_corpus(dir);
    for (const auto& c : corpus.channels()) store.add(store.channels_, store.channel_index_, c.channel_id, c, "channel");
    for (const auto& v : corpus.videos()) store.add(store.videos_, store.video_index_, v.video_id, v, "video");
    for (const auto& c : corpus.comments()) store.add(store.comments_, store.comment_index_, c.comment_id, c, "comment");
  }
  if (const auto state = dir / "ingest_state.json"; fs::exists(state)) {
    const auto saved = read_json_file(state);
    for (const auto& key : saved.at("completed_cells")) store.completed_.insert(key.get<std::string>());
  }
  return store;
}

template <typename T>
void IngestStore::add(std::vector<T>& items, std::unordered_map<std::string, std::size_t>& index,
                      const std::string& id, const T& item, const char* kind) {
  auto [it, inserted] = index.emplace(id, items.size());
  if (inserted) {
    items.push_back(item);
  } else if (!(items[it->second] == item)) {
    ++conflicts_;
    spdlog::warn("{} {} seen again with different fields; keeping the first record", kind, id);
  }
}

void IngestStore::merge(const FetchResult& result) {
  for (const auto& c : result.channels) add(channels_, channel_index_, c.channel_id, c, "channel");
  for (const auto& v : result.videos) add(videos_, video_index_, v.video_id, v, "video");
  for (const auto& c : result.comments) add(comments_, comment_index_, c.comment_id, c, "comment");
  completed_.insert(result.spec.cell_key());
}

bool IngestStore::is_complete(const std::string& cell_key) const {
  return completed_.contains(cell_key);
}

void IngestStore::save(const fs::path& dir, const MonthRange& window) const {
  save_corpus(Corpus(channels_, videos_, comments_), dir, window);
  json cells = json::array();
  for (const auto& key : completed_) cells.push_back(key);
  write_json_file(dir / "ingest_state.json", json{{"completed_cells", cells}});
}

IngestSummary run_ingest(std::span<const QuerySpec> specs, PlatformClient& client,
                         IngestStore& store, const IngestOptions& options) {
  IngestSummary summary;
  summary.cells = specs.size();
  std::vector<const QuerySpec*> todo;
  for (const auto& s : specs) {
    if (store.is_complete(s.cell_key())) {
      ++summary.skipped;
    } else {
      todo.push_back(&s);
    }
  }

  struct Slot {
    bool ready = false;
    std::optional<FetchResult> result;
    std::optional<CellFailure> failure;
  };
  std::vector<Slot> slots(todo.size());
  std::mutex mu;
  std::condition_variable cv;
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < todo.size(); i = next++) {
      Slot local;
      try {
        local.result = options.retry.run([&] { return fetch_month(*todo[i], client); });
      } catch (const Error& e) {
        local.failure = CellFailure{todo[i]->cell_key(), e.kind(), e.what()};
      } catch (const std::exception& e) {
        local.failure = CellFailure{todo[i]->cell_key(), ErrorKind::kGeneric, e.what()};
      }
      {
        std::lock_guard lock(mu);
        slots[i] = std::move(local);
        slots[i].ready = true;
      }
      cv.notify_all();
    }
  };

  const auto workers = std::max(1, std::min<int>(options.parallelism, static_cast<int>(todo.size())));
  std::vector<std::thread> pool;
  for (int w = 0; w < workers && !todo.empty(); ++w) pool.emplace_back(worker);

  for (std::size_t i = 0; i < todo.size(); ++i) {
    Slot slot;
    {
      std::unique_lock lock(mu);
      cv.wait(lock, [&] { return slots[i].ready; });
      slot = std::move(slots[i]);
    }
    if (slot.failure) {
      spdlog::error("cell {} failed: {}", slot.failure->cell_key, slot.failure->message);
      summary.failures.push_back(std::move(*slot.failure));
    } else {
      store.merge(*slot.result);
      ++summary.fetched;
    }
  }
  for (auto& t : pool) t.join();
  return summary;
}

}  // namespace vaxstance
