// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "vaxstance/corpus.hpp"
#include "vaxstance/lexicon.hpp"
#include "vaxstance/stance.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace vaxstance {

/// Rounds half away from zero to `decimals` places, the way published tables
/// round.
double round_to(double value, int decimals);

// --- engagement by stance ---------------------------------------------------

struct StanceEngagementRow {
  Stance stance = Stance::kInconclusive;
  std::int64_t comment_count = 0;
  std::int64_t like_total = 0;
  std::int64_t reply_total = 0;   // sum of the comments' reply_count
  std::int64_t unique_users = 0;  // distinct author_id within the stance
  std::optional<double> likes_per_comment;
  std::optional<double> replies_per_comment;
};

/// One row per stance in class order. Every comment must carry a stance.
std::array<StanceEngagementRow, kNumClasses> stance_engagement_table(const Corpus& corpus);

/// A published ratio to check against the computed one.
struct RatioReference {
  Stance stance = Stance::kInconclusive;
  std::string metric;  // "likes_per_comment" or "replies_per_comment"
  double published = 0.0;
  int decimals = 1;
};

struct RatioCheck {
  RatioReference reference;
  std::optional<double> computed;
  bool matches = false;  // computed rounds to the published value
};

std::vector<RatioCheck> check_ratios(std::span<const StanceEngagementRow> rows,
                                     std::span<const RatioReference> references);

// --- vaccine mentions -------------------------------------------------------

struct ZScores {
  std::map<int, double> values;
  double mean = 0.0;
  double sigma = 0.0;     // population standard deviation
  bool constant = false;  // sigma == 0; all outputs are 0
};

/// (x - mean) / sigma over the series with population sigma. Needs >= 1 point.
ZScores zscore(const std::map<int, double>& series);

struct MentionSeries {
  std::string vaccine;
  Stance side = Stance::kFavorable;
  std::map<int, std::int64_t> counts;  // every year of the window, zeros kept
  ZScores z;
  std::set<int> partial_years;         // years the window covers only in part
};

/// Per-vaccine yearly counts of comments with stance `side` inside `window`.
/// A comment naming k vaccines counts once in each of the k series. Series
/// follow the lexicon's canonical order.
std::vector<MentionSeries> mention_series(const Corpus& corpus, const CompiledLexicon& lexicon,
                                          Stance side, const MonthRange& window = kDefaultWindow);

// --- reply polarization -----------------------------------------------------

struct ReplyStanceMatrix {
  Period period = Period::kOutOfRange;
  /// support[parent][reply] over {F, A}; index with index(Stance).
  std::array<std::array<std::int64_t, 2>, 2> support{};
  /// probs[parent] = P(reply | parent); absent when the row has no support.
  std::array<std::optional<std::array<double, 2>>, 2> probs;

  std::int64_t total_pairs() const noexcept;
};

/// Counts (parent, direct reply) pairs where both stances are polarized and
/// the reply's timestamp falls in `period`.
ReplyStanceMatrix reply_stance_matrix(const Corpus& corpus, const ReplyIndex& replies,
                                      Period period);

struct PolarizedProportion {
  Period period = Period::kOutOfRange;
  std::int64_t total = 0;
  std::int64_t polarized = 0;
  std::optional<double> percent;  // unrounded; absent when total is 0
};

PolarizedProportion polarized_proportion(const Corpus& corpus, Period period);

// --- channel taxonomy and rankings -----------------------------------------

struct TaxonomyRecord {
  std::string channel_id;
  std::string name;
  AnjStatus anj = AnjStatus::kNotApplicable;
  ChannelType type = ChannelType::kUnknown;
};

class Taxonomy {
 public:
  Taxonomy() = default;
  explicit Taxonomy(std::vector<TaxonomyRecord> records);

  /// JSON list of {channel_id, name, anj: yes|no|na, type: LNM|SC|DC}.
  static Taxonomy from_json(const json& j);
  static Taxonomy load(const std::filesystem::path& path);

  const TaxonomyRecord* find(std::string_view channel_id) const;
  const std::vector<TaxonomyRecord>& records() const noexcept { return records_; }

 private:
  std::vector<TaxonomyRecord> records_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

/// Copies type and certification onto channels. Channels without a record
/// become UNKNOWN / not-applicable.
std::vector<Channel> apply_taxonomy(std::span<const Channel> channels, const Taxonomy& taxonomy);

struct ChannelRankRow {
  std::string channel_id;
  std::string name;
  ChannelType type = ChannelType::kUnknown;
  AnjStatus anj = AnjStatus::kNotApplicable;
  bool in_taxonomy = false;
  std::int64_t total = 0;  // all comments on the channel
  std::int64_t pro_count = 0;
  int pro_rank = 0;        // 1-based over all channels
  std::int64_t anti_count = 0;
  int anti_rank = 0;
};

/// Pro and anti rankings by FAVORABLE and AGAINST comment counts, each
/// descending with ties by channel name. Rows are the `top_n` channels with
/// the most comments overall (ties by name), each carrying both ranks.
std::vector<ChannelRankRow> channel_crossrank(const Corpus& corpus, const Taxonomy& taxonomy,
                                              std::size_t top_n = 15);

enum class VideoRankKey { kAnti, kPro, kPolarized };
std::string_view to_string(VideoRankKey k) noexcept;

struct VideoRankRow {
  int rank = 0;
  std::string video_id;
  std::string title;
  std::string channel_id;
  std::int64_t count = 0;
  std::int64_t anti = 0;
  std::int64_t pro = 0;
  std::int64_t views = 0;
  std::int64_t likes = 0;

  bool operator==(const VideoRankRow&) const = default;
};

/// Videos by AGAINST, FAVORABLE, or combined count, descending, ties by
/// video_id. Videos with a zero count are not ranked.
std::vector<VideoRankRow> video_rank(const Corpus& corpus, VideoRankKey key,
                                     std::size_t top_n = 15);

struct CertificationShare {
  std::int64_t against_total = 0;
  std::int64_t non_certified = 0;  // ANJ "no" or "na"
  std::optional<double> percent;
};

/// Share of AGAINST comments on channels outside the certified ecosystem.
/// Certification comes from the taxonomy; channels without a record count
/// as non-certified.
CertificationShare aggregate_share(const Corpus& corpus, const Taxonomy& taxonomy);

}  // namespace vaxstance
