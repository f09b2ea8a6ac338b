// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "vaxstance/stance.hpp"
#include "vaxstance/timeutil.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace vaxstance {

using json = nlohmann::ordered_json;

/// Newspaper-association certification. `kNotApplicable` marks channels for
/// which certification does not apply (individual creators, foreign media).
enum class AnjStatus : std::uint8_t { kYes, kNo, kNotApplicable };

/// Legacy news media, science/health communicator, digital-native commentary.
enum class ChannelType : std::uint8_t { kLNM, kSC, kDC, kUnknown };

std::string_view to_string(AnjStatus s) noexcept;      // "yes" / "no" / "na"
std::string_view to_string(ChannelType t) noexcept;    // "LNM" / "SC" / "DC" / "UNKNOWN"
AnjStatus parse_anj(std::string_view text);            // accepts yes|no|na|not-applicable
ChannelType parse_channel_type(std::string_view text);

struct Channel {
  std::string channel_id;
  std::string name;
  AnjStatus anj_certified = AnjStatus::kNotApplicable;
  ChannelType channel_type = ChannelType::kUnknown;

  bool operator==(const Channel&) const = default;
};

struct Video {
  std::string video_id;
  std::string channel_id;
  std::string title;
  Timestamp published_at{};
  std::int64_t view_count = 0;
  std::int64_t like_count = 0;

  bool operator==(const Video&) const = default;
};

struct Comment {
  std::string comment_id;
  std::string video_id;
  std::string author_id;
  std::optional<std::string> parent_id;  // absent for top-level comments
  std::string text;
  Timestamp published_at{};
  std::int64_t like_count = 0;
  std::int64_t reply_count = 0;
  std::optional<Stance> stance;

  bool operator==(const Comment&) const = default;
};

json to_json(const Channel& c);
json to_json(const Video& v);
json to_json(const Comment& c);
Channel channel_from_json(const json& j);
Video video_from_json(const json& j);
Comment comment_from_json(const json& j);

/// Collection window used when a manifest does not specify one.
inline const MonthRange kDefaultWindow{{2018, 1}, {2024, 7}};

struct CorpusManifest {
  std::int64_t channels = 0;
  std::int64_t videos = 0;
  std::int64_t comments = 0;
  MonthRange window = kDefaultWindow;
};

json to_json(const CorpusManifest& m);
CorpusManifest manifest_from_json(const json& j);

/// Immutable, integrity-checked collection of channels, videos and comments.
///
/// Construction validates: unique ids per entity kind, every video's channel
/// and every comment's video resolve, a parent comment exists and lives on
/// the same video, and parent chains terminate (no cycles). Violations throw
/// a validation Error naming the offending key.
class Corpus {
 public:
  Corpus() = default;
  Corpus(std::vector<Channel> channels, std::vector<Video> videos,
         std::vector<Comment> comments);

  const std::vector<Channel>& channels() const noexcept { return channels_; }
  const std::vector<Video>& videos() const noexcept { return videos_; }
  const std::vector<Comment>& comments() const noexcept { return comments_; }

  const Channel* find_channel(std::string_view id) const;
  const Video* find_video(std::string_view id) const;
  const Comment* find_comment(std::string_view id) const;
  std::optional<std::size_t> comment_index(std::string_view id) const;
  std::optional<std::size_t> video_index(std::string_view id) const;

  /// Channel owning the video of comment `i`.
  const Channel& channel_of_comment(std::size_t i) const;

  bool operator==(const Corpus& other) const {
    return channels_ == other.channels_ && videos_ == other.videos_ &&
           comments_ == other.comments_;
  }

 private:
  std::vector<Channel> channels_;
  std::vector<Video> videos_;
  std::vector<Comment> comments_;
  std::unordered_map<std::string, std::size_t> channel_by_id_;
  std::unordered_map<std::string, std::size_t> video_by_id_;
  std::unordered_map<std::string, std::size_t> comment_by_id_;
  std::vector<std::size_t> comment_channel_;  // comment index -> channel index
};

/// Reads channels.jsonl, videos.jsonl, comments.jsonl from `dir`. When a
/// manifest.json is present its counts must agree with the files.
Corpus load_corpus(const std::filesystem::path& dir);

/// Reads only manifest.json.
CorpusManifest read_manifest(const std::filesystem::path& dir);

/// Writes the three JSONL files plus manifest.json. Output is canonical:
/// loading and saving again reproduces the same bytes.
void save_corpus(const Corpus& corpus, const std::filesystem::path& dir,
                 const MonthRange& window = kDefaultWindow);

/// Removes videos whose folded title contains one of the lesson/exam stems
/// as a whole word. Survivor order is preserved.
std::vector<Video> filter_educational_titles(std::span<const Video> videos);

/// Maps text to an ISO 639-1 code ("pt", "en", ...). May throw.
class LanguageDetector {
 public:
  virtual ~LanguageDetector() = default;
  virtual std::string detect(std::string_view text) const = 0;
  virtual std::string name() const = 0;
};

/// Deterministic stand-in for trained language-ID models: votes for the
/// language whose function-word list covers more tokens. Ties and texts
/// without function words resolve to "und".
class StopwordLanguageDetector final : public LanguageDetector {
 public:
  std::string detect(std::string_view text) const override;
  std::string name() const override { return "stopword"; }
};

struct LanguageFilterResult {
  std::vector<Comment> kept;
  std::size_t dropped = 0;
  std::size_t detector_failures = 0;
};

/// Keeps a comment when ANY detector returns "pt". A detector that throws
/// counts as a non-Portuguese vote for that comment and is logged.
LanguageFilterResult filter_language(std::span<const Comment> comments,
                                     std::span<const LanguageDetector* const> detectors);

/// Builds a corpus keeping only the listed videos and comments. Comments on
/// dropped videos and replies whose ancestor was dropped are removed too.
Corpus prune_corpus(const Corpus& corpus, std::span<const Video> kept_videos,
                    std::span<const Comment> kept_comments);

enum class Period : std::uint8_t { kPrePandemic, kPandemic, kPostPandemic, kOutOfRange };

inline constexpr std::array<Period, 3> kInRangePeriods = {
    Period::kPrePandemic, Period::kPandemic, Period::kPostPandemic};

std::string_view to_string(Period p) noexcept;

/// Pre-pandemic 2018-01-01..2020-03-10, pandemic 2020-03-11..2023-05-04,
/// post-pandemic 2023-05-05..2024-07-01; dates inclusive, compared in UTC.
Period period_of(Timestamp t) noexcept;

/// Direct (depth-1) replies of every comment, each list ordered by
/// (published_at, comment_id).
class ReplyIndex {
 public:
  explicit ReplyIndex(const Corpus& corpus);

  /// Indices into corpus.comments().
  const std::vector<std::size_t>& replies(std::size_t comment_index) const {
    return replies_.at(comment_index);
  }
  std::size_t size() const noexcept { return replies_.size(); }

 private:
  std::vector<std::vector<std::size_t>> replies_;
};

inline ReplyIndex build_reply_index(const Corpus& corpus) { return ReplyIndex(corpus); }

}  // namespace vaxstance
