// SPDX-License-Identifier: Apache-2.0
// Corpus builders shared by the unit and acceptance suites.
#pragma once

#include "vaxstance/analytics.hpp"
#include "vaxstance/corpus.hpp"
#include "vaxstance/self_training.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace vaxstance::testing {

Comment make_comment(std::string id, std::string video_id, std::string author,
                     std::optional<Stance> stance, Timestamp at, std::int64_t likes = 0,
                     std::int64_t replies = 0, std::optional<std::string> parent = std::nullopt,
                     std::string text = {});

// Per-stance engagement totals and per-period polarized totals of the
// reference corpus. Both tables describe the same 1,396,657 comments.
struct EngagementTotals {
  std::int64_t comments, likes, replies, users;
};
inline constexpr std::array<EngagementTotals, 3> kTableOneTotals{{
    {152'940, 598'780, 66'959, 91'633},       // FAVORABLE
    {204'179, 838'977, 79'137, 115'037},      // AGAINST
    {1'039'538, 3'936'064, 475'114, 487'778}, // INCONCLUSIVE
}};

struct PeriodTotals {
  Period period;
  std::int64_t total;
  std::int64_t polarized;
};
inline constexpr std::array<PeriodTotals, 3> kTableTwoTotals{{
    {Period::kPrePandemic, 74'174, 10'104},
    {Period::kPandemic, 1'219'820, 317'406},
    {Period::kPostPandemic, 102'663, 29'609},
}};

/// A timestamp well inside each in-range period.
Timestamp mid_period(Period p);

/// Full-size corpus carrying both the per-stance engagement totals and the
/// per-period polarized totals above. Roughly 400 MB in memory.
Corpus reference_scale_corpus();

/// Same per-period polarized shares at a reduced size: `per_period`
/// comments in each period with the given polarized counts.
Corpus period_share_corpus(std::int64_t per_period, const std::array<std::int64_t, 3>& polarized);

/// Direct-reply trees encoding one conditional reply matrix per period.
/// Counts are support[parent][reply] with index 0 = FAVORABLE, 1 = AGAINST.
using PairCounts = std::array<std::array<std::int64_t, 2>, 2>;
Corpus reply_tree_corpus(const std::array<PairCounts, 3>& per_period);

/// The reply structure read off the published heatmaps.
std::array<PairCounts, 3> published_reply_counts();

struct ChannelSeed {
  std::string channel_id;
  std::string name;
  ChannelType type;
  AnjStatus anj;
  std::int64_t pro;
  std::int64_t anti;
  std::int64_t inconclusive = 0;
};
/// Leading channels of the published channel ranking plus a tail.
std::vector<ChannelSeed> published_channel_seeds();
Corpus channel_corpus(const std::vector<ChannelSeed>& seeds);
Taxonomy taxonomy_of(const std::vector<ChannelSeed>& seeds);

struct VideoSeed {
  std::string video_id;
  std::int64_t anti;
  std::int64_t pro;
  std::int64_t views;
  std::int64_t likes;
};
std::vector<VideoSeed> published_video_seeds();
Corpus video_corpus(const std::vector<VideoSeed>& seeds);

/// Cue-separable synthetic data for the mock self-training loop. Labeled
/// texts carry one strong cue per class; the unlabeled pool pairs a strong
/// cue with weak cues; half the held-out texts carry weak cues only.
struct CueWorld {
  std::vector<std::pair<std::string, Stance>> labeled;     // (text, stance)
  std::vector<std::pair<std::string, std::string>> pool;   // (comment_id, text)
  std::vector<Stance> pool_truth;
  std::vector<std::pair<std::string, Stance>> held_out;    // (text, stance)
};
CueWorld make_cue_world(std::uint64_t seed, const std::array<int, 3>& labeled_per_class,
                        int pool_size, int held_out_per_class);

/// A fresh empty directory under the system temp dir.
std::filesystem::path temp_dir(const std::string& tag);

}  // namespace vaxstance::testing
