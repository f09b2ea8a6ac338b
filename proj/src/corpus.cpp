// SPDX-License-Identifier: Apache-2.0
#include "vaxstance/corpus.hpp"

#include "vaxstance/error.hpp"
#include "vaxstance/jsonl.hpp"
#include "vaxstance/text.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <array>
#include <unordered_set>

namespace vaxstance {

namespace fs = std::filesystem;

std::string_view to_string(AnjStatus s) noexcept {
  switch (s) {
    case AnjStatus::kYes:
      return "yes";
    case AnjStatus::kNo:
      return "no";
    case AnjStatus::kNotApplicable:
      return "na";
  }
  return "na";
}

std::string_view to_string(ChannelType t) noexcept {
  switch (t) {
    case ChannelType::kLNM:
      return "LNM";
    case ChannelType::kSC:
      return "SC";
    case ChannelType::kDC:
      return "DC";
    case ChannelType::kUnknown:
      return "UNKNOWN";
  }
  return "UNKNOWN";
}

AnjStatus parse_anj(std::string_view text) {
  if (text == "yes") return AnjStatus::kYes;
  if (text == "no") return AnjStatus::kNo;
  if (text == "na" || text == "not-applicable") return AnjStatus::kNotApplicable;
  throw validation_error("unknown ANJ status '" + std::string(text) + "' (want yes|no|na)");
}

ChannelType parse_channel_type(std::string_view text) {
  if (text == "LNM") return ChannelType::kLNM;
  if (text == "SC") return ChannelType::kSC;
  if (text == "DC") return ChannelType::kDC;
  if (text == "UNKNOWN") return ChannelType::kUnknown;
  throw validation_error("unknown channel type '" + std::string(text) + "'");
}

std::string_view to_string(Period p) noexcept {
  switch (p) {
    case Period::kPrePandemic:
      return "PRE_PANDEMIC";
    case Period::kPandemic:
      return "PANDEMIC";
    case Period::kPostPandemic:
      return "POST_PANDEMIC";
    case Period::kOutOfRange:
      return "OUT_OF_RANGE";
  }
  return "OUT_OF_RANGE";
}

// ---------------------------------------------------------------------------
// JSON mapping

namespace {

std::int64_t non_negative(const json& j, const char* key) {
  const auto v = j.at(key).get<std::int64_t>();
  if (v < 0) throw validation_error(std::string(key) + " must be >= 0");
  return v;
}

const std::string& non_empty(const json& j, const char* key) {
  const auto& v = j.at(key).get_ref<const std::string&>();
  if (v.empty()) throw validation_error(std::string(key) + " must not be empty");
  return v;
}

}  // namespace

json to_json(const Channel& c) {
  return json{{"channel_id", c.channel_id},
              {"name", c.name},
              {"anj_certified", to_string(c.anj_certified)},
              {"channel_type", to_string(c.channel_type)}};
}

json to_json(const Video& v) {
  return json{{"video_id", v.video_id},         {"channel_id", v.channel_id},
              {"title", v.title},               {"published_at", format_rfc3339(v.published_at)},
              {"view_count", v.view_count},     {"like_count", v.like_count}};
}

json to_json(const Comment& c) {
  json j{{"comment_id", c.comment_id}, {"video_id", c.video_id}, {"author_id", c.author_id}};
  if (c.parent_id) j["parent_id"] = *c.parent_id;
  j["text"] = c.text;
  j["published_at"] = format_rfc3339(c.published_at);
  j["like_count"] = c.like_count;
  j["reply_count"] = c.reply_count;
  if (c.stance) j["stance"] = to_string(*c.stance);
  return j;
}

Channel channel_from_json(const json& j) {
  Channel c;
  c.channel_id = non_empty(j, "channel_id");
  c.name = j.value("name", std::string{});
  c.anj_certified = parse_anj(j.value("anj_certified", std::string{"na"}));
  c.channel_type = parse_channel_type(j.value("channel_type", std::string{"UNKNOWN"}));
  return c;
}

Video video_from_json(const json& j) {
  Video v;
  v.video_id = non_empty(j, "video_id");
  v.channel_id = non_empty(j, "channel_id");
  v.title = j.at("title").get<std::string>();
  v.published_at = parse_rfc3339(j.at("published_at").get_ref<const std::string&>());
  v.view_count = non_negative(j, "view_count");
  v.like_count = non_negative(j, "like_count");
  return v;
}

Comment comment_from_json(const json& j) {
  Comment c;
  c.comment_id = non_empty(j, "comment_id");
  c.video_id = non_empty(j, "video_id");
  c.author_id = j.at("author_id").get<std::string>();
  if (auto it = j.find("parent_id"); it != j.end() && !it->is_null()) {
    c.parent_id = it->get<std::string>();
  }
  c.text = j.at("text").get<std::string>();
  c.published_at = parse_rfc3339(j.at("published_at").get_ref<const std::string&>());
  c.like_count = non_negative(j, "like_count");
  c.reply_count = non_negative(j, "reply_count");
  if (auto it = j.find("stance"); it != j.end() && !it->is_null()) {
    c.stance = require_stance(it->get_ref<const std::string&>());
  }
  return c;
}

json to_json(const CorpusManifest& m) {
  return json{{"format_version", 1},
              {"counts",
               {{"channels", m.channels}, {"videos", m.videos}, {"comments", m.comments}}},
              {"window", {{"first", m.window.first.to_string()}, {"last", m.window.last.to_string()}}}};
}

CorpusManifest manifest_from_json(const json& j) {
  CorpusManifest m;
  const auto& counts = j.at("counts");
  m.channels = non_negative(counts, "channels");
  m.videos = non_negative(counts, "videos");
  m.comments = non_negative(counts, "comments");
  if (auto it = j.find("window"); it != j.end()) {
    m.window.first = parse_year_month(it->at("first").get<std::string>());
    m.window.last = parse_year_month(it->at("last").get<std::string>());
    if (m.window.last < m.window.first) throw validation_error("manifest window is empty");
  }
  return m;
}

// ---------------------------------------------------------------------------
// Corpus

Corpus::Corpus(std::vector<Channel> channels, std::vector<Video> videos,
               std::vector<Comment> comments)
    : channels_(std::move(channels)), videos_(std::move(videos)), comments_(std::move(comments)) {
  channel_by_id_.reserve(channels_.size());
  for (std::size_t i = 0; i < channels_.size(); ++i) {
    if (!channel_by_id_.emplace(channels_[i].channel_id, i).second) {
      throw validation_error("duplicate channel_id '" + channels_[i].channel_id + "'");
    }
  }
  std::vector<std::size_t> video_channel(videos_.size());
  video_by_id_.reserve(videos_.size());
  for (std::size_t i = 0; i < videos_.size(); ++i) {
    const Video& v = videos_[i];
    if (!video_by_id_.emplace(v.video_id, i).second) {
      throw validation_error("duplicate video_id '" + v.video_id + "'");
    }
    auto ch = channel_by_id_.find(v.channel_id);
    if (ch == channel_by_id_.end()) {
      throw validation_error("video '" + v.video_id + "' references unknown channel_id '" +
                             v.channel_id + "'");
    }
    if (v.view_count < 0 || v.like_count < 0) {
      throw validation_error("video '" + v.video_id + "' has negative counts");
    }
    video_channel[i] = ch->second;
  }

  comment_by_id_.reserve(comments_.size());
  comment_channel_.resize(comments_.size());
  std::vector<std::size_t> comment_video(comments_.size());
  for (std::size_t i = 0; i < comments_.size(); ++i) {
    const Comment& c = comments_[i];
    if (!comment_by_id_.emplace(c.comment_id, i).second) {
      throw validation_error("duplicate comment_id '" + c.comment_id + "'");
    }
    auto v = video_by_id_.find(c.video_id);
    if (v == video_by_id_.end()) {
      throw validation_error("comment '" + c.comment_id + "' references unknown video_id '" +
                             c.video_id + "'");
    }
    if (c.like_count < 0 || c.reply_count < 0) {
      throw validation_error("comment '" + c.comment_id + "' has negative counts");
    }
    comment_video[i] = v->second;
    comment_channel_[i] = video_channel[v->second];
  }

  // Parent links: resolvable, same video, acyclic. state: 0 unvisited,
  // 1 on current chain, 2 known to terminate.
  std::vector<std::size_t> parent(comments_.size(), comments_.size());
  for (std::size_t i = 0; i < comments_.size(); ++i) {
    const Comment& c = comments_[i];
    if (!c.parent_id) continue;
    auto p = comment_by_id_.find(*c.parent_id);
    if (p == comment_by_id_.end()) {
      throw validation_error("comment '" + c.comment_id + "' references unknown parent_id '" +
                             *c.parent_id + "'");
    }
    if (comment_video[p->second] != comment_video[i]) {
      throw validation_error("comment '" + c.comment_id + "' replies to '" + *c.parent_id +
                             "' on a different video");
    }
    parent[i] = p->second;
  }
  std::vector<std::uint8_t> state(comments_.size(), 0);
  std::vector<std::size_t> chain;
  for (std::size_t i = 0; i < comments_.size(); ++i) {
    std::size_t cur = i;
    chain.clear();
    while (cur != comments_.size() && state[cur] == 0) {
      state[cur] = 1;
      chain.push_back(cur);
      cur = parent[cur];
    }
    if (cur != comments_.size() && state[cur] == 1) {
      throw validation_error("reply cycle through comment '" + comments_[cur].comment_id + "'");
    }
    for (std::size_t k : chain) state[k] = 2;
  }
}

const Channel* Corpus::find_channel(std::string_view id) const {
  auto it = channel_by_id_.find(std::string(id));
  return it == channel_by_id_.end() ? nullptr : &channels_[it->second];
}

const Video* Corpus::find_video(std::string_view id) const {
  auto it = video_by_id_.find(std::string(id));
  return it == video_by_id_.end() ? nullptr : &videos_[it->second];
}

const Comment* Corpus::find_comment(std::string_view id) const {
  auto it = comment_by_id_.find(std::string(id));
  return it == comment_by_id_.end() ? nullptr : &comments_[it->second];
}

std::optional<std::size_t> Corpus::comment_index(std::string_view id) const {
  auto it = comment_by_id_.find(std::string(id));
  if (it == comment_by_id_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Corpus::video_index(std::string_view id) const {
  auto it = video_by_id_.find(std::string(id));
  if (it == video_by_id_.end()) return std::nullopt;
  return it->second;
}

const Channel& Corpus::channel_of_comment(std::size_t i) const {
  return channels_[comment_channel_.at(i)];
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

constexpr const char* kChannelsFile = "channels.jsonl";
constexpr const char* kVideosFile = "videos.jsonl";
constexpr const char* kCommentsFile = "comments.jsonl";
constexpr const char* kManifestFile = "manifest.json";

}  // namespace

CorpusManifest read_manifest(const fs::path& dir) {
  const fs::path path = dir / kManifestFile;
  try {
    return manifest_from_json(read_json_file(path));
  } catch (const json::exception& e) {
    throw validation_error(path.string() + ": " + e.what());
  }
}

Corpus load_corpus(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw missing_input("corpus directory not found: " + dir.string());

  std::vector<Channel> channels;
  std::vector<Video> videos;
  std::vector<Comment> comments;
  for_each_jsonl(dir / kChannelsFile,
                 [&](const json& row, std::size_t) { channels.push_back(channel_from_json(row)); });
  for_each_jsonl(dir / kVideosFile,
                 [&](const json& row, std::size_t) { videos.push_back(video_from_json(row)); });
  for_each_jsonl(dir / kCommentsFile,
                 [&](const json& row, std::size_t) { comments.push_back(comment_from_json(row)); });

  if (fs::exists(dir / kManifestFile)) {
    const CorpusManifest m = read_manifest(dir);
    if (m.channels != static_cast<std::int64_t>(channels.size()) ||
        m.videos != static_cast<std::int64_t>(videos.size()) ||
        m.comments != static_cast<std::int64_t>(comments.size())) {
      throw validation_error("manifest counts (" + std::to_string(m.channels) + ", " +
                             std::to_string(m.videos) + ", " + std::to_string(m.comments) +
                             ") disagree with files (" + std::to_string(channels.size()) + ", " +
                             std::to_string(videos.size()) + ", " +
                             std::to_string(comments.size()) + ")");
    }
  }
  return Corpus(std::move(channels), std::move(videos), std::move(comments));
}

void save_corpus(const Corpus& corpus, const fs::path& dir, const MonthRange& window) {
  fs::create_directories(dir);
  std::vector<json> rows;
  rows.reserve(corpus.channels().size());
  for (const auto& c : corpus.channels()) rows.push_back(to_json(c));
  write_jsonl(dir / kChannelsFile, rows);
  rows.clear();
  for (const auto& v : corpus.videos()) rows.push_back(to_json(v));
  write_jsonl(dir / kVideosFile, rows);
  rows.clear();
  for (const auto& c : corpus.comments()) rows.push_back(to_json(c));
  write_jsonl(dir / kCommentsFile, rows);

  CorpusManifest m;
  m.channels = static_cast<std::int64_t>(corpus.channels().size());
  m.videos = static_cast<std::int64_t>(corpus.videos().size());
  m.comments = static_cast<std::int64_t>(corpus.comments().size());
  m.window = window;
  write_json_file(dir / kManifestFile, to_json(m));
}

// ---------------------------------------------------------------------------
// Filters

std::vector<Video> filter_educational_titles(std::span<const Video> videos) {
  static const std::array<std::string_view, 5> kStems = {"professor", "aula", "curso", "prova",
                                                         "revisao"};
  std::vector<Video> kept;
  kept.reserve(videos.size());
  for (const auto& v : videos) {
    const auto tokens = text::tokenize(v.title);
    const bool educational = std::any_of(tokens.begin(), tokens.end(), [](const std::string& t) {
      return std::find(kStems.begin(), kStems.end(), t) != kStems.end();
    });
    if (!educational) kept.push_back(v);
  }
  return kept;
}

namespace {

const std::unordered_set<std::string>& portuguese_words() {
  static const std::unordered_set<std::string> words = {
      "de",    "que",   "e",     "do",    "da",     "em",    "um",     "para",  "com",
      "nao",   "uma",   "os",    "no",    "se",     "na",    "por",    "mais",  "as",
      "dos",   "como",  "mas",   "ao",    "ele",    "das",   "tem",    "seu",   "sua",
      "ou",    "ser",   "quando", "muito", "nos",   "ja",    "eu",     "tambem", "so",
      "pelo",  "pela",  "ate",   "isso",  "ela",    "entre", "depois", "sem",   "mesmo",
      "aos",   "seus",  "quem",  "nas",   "me",     "esse",  "eles",   "voce",  "essa",
      "num",   "nem",   "suas",  "meu",   "minha",  "numa",  "pelos",  "elas",  "qual",
      "nossa", "este",  "esta",  "isto",  "aquilo", "estao", "foi",    "sao",   "ja",
      "tomei", "tomar", "vacina", "vacinas", "obrigado", "gente", "aqui", "agora", "pra"};
  return words;
}

const std::unordered_set<std::string>& english_words() {
  static const std::unordered_set<std::string> words = {
      "the",  "and",  "is",   "of",   "to",    "in",    "that",  "it",   "for",
      "you",  "was",  "with", "on",   "are",   "this",  "be",    "have", "not",
      "but",  "they", "what", "from", "or",    "by",    "we",    "an",   "were",
      "which", "their", "has", "would", "there", "can", "all",  "your", "i",
      "my",   "he",   "she",  "will", "vaccine", "vaccines", "people", "just", "get"};
  return words;
}

}  // namespace

std::string StopwordLanguageDetector::detect(std::string_view text) const {
  std::size_t pt = 0;
  std::size_t en = 0;
  for (const auto& token : text::tokenize(text)) {
    if (portuguese_words().count(token)) ++pt;
    if (english_words().count(token)) ++en;
  }
  if (pt > en) return "pt";
  if (en > pt) return "en";
  return "und";
}

LanguageFilterResult filter_language(std::span<const Comment> comments,
                                     std::span<const LanguageDetector* const> detectors) {
  if (detectors.empty()) throw validation_error("filter_language needs at least one detector");
  LanguageFilterResult result;
  for (const auto& c : comments) {
    bool portuguese = false;
    for (const LanguageDetector* d : detectors) {
      try {
        if (d->detect(c.text) == "pt") {
          portuguese = true;
          break;
        }
      } catch (const std::exception& e) {
        ++result.detector_failures;
        spdlog::warn("language detector '{}' failed on comment {}: {}", d->name(), c.comment_id,
                     e.what());
      }
    }
    if (portuguese) {
      result.kept.push_back(c);
    } else {
      ++result.dropped;
    }
  }
  return result;
}

Corpus prune_corpus(const Corpus& corpus, std::span<const Video> kept_videos,
                    std::span<const Comment> kept_comments) {
  std::unordered_set<std::string> video_ids;
  for (const auto& v : kept_videos) video_ids.insert(v.video_id);
  std::unordered_set<std::string> candidate;
  for (const auto& c : kept_comments) {
    if (video_ids.count(c.video_id)) candidate.insert(c.comment_id);
  }

  // A comment survives when it and all its ancestors are candidates.
  const auto& all = corpus.comments();
  std::vector<std::int8_t> alive(all.size(), -1);
  auto resolve = [&](std::size_t i) {
    std::vector<std::size_t> chain;
    std::size_t cur = i;
    std::int8_t verdict = 1;
    while (true) {
      if (alive[cur] != -1) {
        verdict = alive[cur];
        break;
      }
      chain.push_back(cur);
      if (!candidate.count(all[cur].comment_id)) {
        verdict = 0;
        break;
      }
      if (!all[cur].parent_id) break;
      cur = *corpus.comment_index(*all[cur].parent_id);
    }
    for (std::size_t k : chain) alive[k] = verdict;
  };

  std::vector<Comment> comments;
  for (std::size_t i = 0; i < all.size(); ++i) {
    resolve(i);
    if (alive[i] == 1) comments.push_back(all[i]);
  }
  std::vector<Video> videos;
  for (const auto& v : corpus.videos()) {
    if (video_ids.count(v.video_id)) videos.push_back(v);
  }
  return Corpus(corpus.channels(), std::move(videos), std::move(comments));
}

// ---------------------------------------------------------------------------
// Periods and reply index

Period period_of(Timestamp t) noexcept {
  static const Timestamp kStart = make_timestamp(2018, 1, 1);
  static const Timestamp kPandemicStart = make_timestamp(2020, 3, 11);
  static const Timestamp kPostStart = make_timestamp(2023, 5, 5);
  static const Timestamp kEndExclusive = make_timestamp(2024, 7, 2);
  if (t < kStart || t >= kEndExclusive) return Period::kOutOfRange;
  if (t < kPandemicStart) return Period::kPrePandemic;
  if (t < kPostStart) return Period::kPandemic;
  return Period::kPostPandemic;
}

ReplyIndex::ReplyIndex(const Corpus& corpus) : replies_(corpus.comments().size()) {
  const auto& comments = corpus.comments();
  for (std::size_t i = 0; i < comments.size(); ++i) {
    if (comments[i].parent_id) {
      replies_[*corpus.comment_index(*comments[i].parent_id)].push_back(i);
    }
  }
  for (auto& list : replies_) {
    std::sort(list.begin(), list.end(), [&](std::size_t a, std::size_t b) {
      if (comments[a].published_at != comments[b].published_at) {
        return comments[a].published_at < comments[b].published_at;
      }
      return comments[a].comment_id < comments[b].comment_id;
    });
  }
}

}  // namespace vaxstance
