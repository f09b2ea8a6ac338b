// SPDX-License-Identifier: Apache-2.0
#include "vaxstance/analytics.hpp"

#include "vaxstance/error.hpp"
#include "vaxstance/jsonl.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace vaxstance {

double round_to(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(value * scale) / scale;
}

std::array<StanceEngagementRow, kNumClasses> stance_engagement_table(const Corpus& corpus) {
  std::array<StanceEngagementRow, kNumClasses> rows;
  std::array<std::unordered_set<std::string_view>, kNumClasses> users;
  for (std::size_t c = 0; c < kNumClasses; ++c) rows[c].stance = stance_at(c);
  for (const auto& comment : corpus.comments()) {
    if (!comment.stance) {
      throw validation_error("comment " + comment.comment_id + " has no stance");
    }
    const auto c = index(*comment.stance);
    ++rows[c].comment_count;
    rows[c].like_total += comment.like_count;
    rows[c].reply_total += comment.reply_count;
    users[c].insert(comment.author_id);
  }
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    auto& r = rows[c];
    r.unique_users = static_cast<std::int64_t>(users[c].size());
    if (r.comment_count > 0) {
      const auto n = static_cast<double>(r.comment_count);
      r.likes_per_comment = static_cast<double>(r.like_total) / n;
      r.replies_per_comment = static_cast<double>(r.reply_total) / n;
    }
  }
  return rows;
}

std::vector<RatioCheck> check_ratios(std::span<const StanceEngagementRow> rows,
                                     std::span<const RatioReference> references) {
  std::vector<RatioCheck> out;
  for (const auto& ref : references) {
    RatioCheck check{ref, std::nullopt, false};
    for (const auto& row : rows) {
      if (row.stance != ref.stance) continue;
      if (ref.metric == "likes_per_comment") {
        check.computed = row.likes_per_comment;
      } else if (ref.metric == "replies_per_comment") {
        check.computed = row.replies_per_comment;
      } else {
        throw validation_error("unknown ratio metric " + ref.metric);
      }
    }
    check.matches = check.computed &&
                    round_to(*check.computed, ref.decimals) == round_to(ref.published, ref.decimals);
    if (!check.matches) {
      spdlog::warn("{} {}: computed {} does not round to the published {}", to_string(ref.stance),
                   ref.metric, check.computed ? std::to_string(*check.computed) : "n/a",
                   ref.published);
    }
    out.push_back(check);
  }
  return out;
}

ZScores zscore(const std::map<int, double>& series) {
  if (series.empty()) throw validation_error("z-score needs at least one value");
  ZScores z;
  const auto n = static_cast<double>(series.size());
  double sum = 0.0;
  for (const auto& [year, v] : series) sum += v;
  z.mean = sum / n;
  double ss = 0.0;
  for (const auto& [year, v] : series) ss += (v - z.mean) * (v - z.mean);
  z.sigma = std::sqrt(ss / n);
  z.constant = !(z.sigma > 0.0);
  for (const auto& [year, v] : series) {
    z.values[year] = z.constant ? 0.0 : (v - z.mean) / z.sigma;
  }
  return z;
}

std::vector<MentionSeries> mention_series(const Corpus& corpus, const CompiledLexicon& lexicon,
                                          Stance side, const MonthRange& window) {
  std::vector<MentionSeries> series(lexicon.size());
  std::unordered_map<std::string, std::size_t> slot;
  for (std::size_t i = 0; i < lexicon.size(); ++i) {
    series[i].vaccine = lexicon.canonicals()[i];
    series[i].side = side;
    slot.emplace(lexicon.canonicals()[i], i);
    for (int y = window.first.year; y <= window.last.year; ++y) {
      series[i].counts[y] = 0;
      const bool starts_late = y == window.first.year && window.first.month > 1;
      const bool ends_early = y == window.last.year && window.last.month < 12;
      if (starts_late || ends_early) series[i].partial_years.insert(y);
    }
  }
  for (const auto& comment : corpus.comments()) {
    if (comment.stance != side) continue;
    const auto ym = year_month_of(comment.published_at);
    if (!window.contains(ym)) continue;
    for (const auto& vaccine : lexicon.match(comment.text)) {
      ++series[slot.at(vaccine)].counts[ym.year];
    }
  }
  for (auto& s : series) {
    std::map<int, double> values;
    for (const auto& [year, count] : s.counts) values[year] = static_cast<double>(count);
    s.z = zscore(values);
  }
  return series;
}

std::int64_t ReplyStanceMatrix::total_pairs() const noexcept {
  return support[0][0] + support[0][1] + support[1][0] + support[1][1];
}

ReplyStanceMatrix reply_stance_matrix(const Corpus& corpus, const ReplyIndex& replies,
                                      Period period) {
  ReplyStanceMatrix m;
  m.period = period;
  const auto& comments = corpus.comments();
  for (std::size_t p = 0; p < comments.size(); ++p) {
    const auto& parent = comments[p];
    if (!parent.stance || !is_polarized(*parent.stance)) continue;
    for (std::size_t r : replies.replies(p)) {
      const auto& reply = comments[r];
      if (!reply.stance || !is_polarized(*reply.stance)) continue;
      if (period_of(reply.published_at) != period) continue;
      ++m.support[index(*parent.stance)][index(*reply.stance)];
    }
  }
  for (std::size_t row = 0; row < 2; ++row) {
    const auto total = m.support[row][0] + m.support[row][1];
    if (total == 0) continue;
    const auto t = static_cast<double>(total);
    m.probs[row] = std::array<double, 2>{static_cast<double>(m.support[row][0]) / t,
                                         static_cast<double>(m.support[row][1]) / t};
  }
  return m;
}

PolarizedProportion polarized_proportion(const Corpus& corpus, Period period) {
  PolarizedProportion out;
  out.period = period;
  for (const auto& c : corpus.comments()) {
    if (period_of(c.published_at) != period) continue;
    ++out.total;
    if (c.stance && is_polarized(*c.stance)) ++out.polarized;
  }
  if (out.total > 0) {
    out.percent = 100.0 * static_cast<double>(out.polarized) / static_cast<double>(out.total);
  }
  return out;
}

Taxonomy::Taxonomy(std::vector<TaxonomyRecord> records) : records_(std::move(records)) {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (records_[i].channel_id.empty()) throw validation_error("taxonomy record without channel_id");
    if (!by_id_.emplace(records_[i].channel_id, i).second) {
      throw validation_error("duplicate taxonomy record for " + records_[i].channel_id);
    }
  }
}

Taxonomy Taxonomy::from_json(const json& j) {
  if (!j.is_array()) throw validation_error("taxonomy must be a JSON list");
  std::vector<TaxonomyRecord> records;
  for (const auto& item : j) {
    TaxonomyRecord r;
    r.channel_id = item.at("channel_id").get<std::string>();
    r.name = item.value("name", std::string());
    r.anj = parse_anj(item.at("anj").get<std::string>());
    r.type = parse_channel_type(item.at("type").get<std::string>());
    if (r.type == ChannelType::kUnknown) {
      throw validation_error("taxonomy record " + r.channel_id + " must have a concrete type");
    }
    records.push_back(std::move(r));
  }
  return Taxonomy(std::move(records));
}

Taxonomy Taxonomy::load(const std::filesystem::path& path) {
  try {
    return from_json(read_json_file(path));
  } catch (const json::exception& e) {
    throw validation_error(path.string() + ": " + e.what());
  }
}

const TaxonomyRecord* Taxonomy::find(std::string_view channel_id) const {
  auto it = by_id_.find(std::string(channel_id));
  return it == by_id_.end() ? nullptr : &records_[it->second];
}

std::vector<Channel> apply_taxonomy(std::span<const Channel> channels, const Taxonomy& taxonomy) {
  std::vector<Channel> out(channels.begin(), channels.end());
  for (auto& ch : out) {
    if (const auto* rec = taxonomy.find(ch.channel_id)) {
      ch.anj_certified = rec->anj;
      ch.channel_type = rec->type;
    } else {
      ch.anj_certified = AnjStatus::kNotApplicable;
      ch.channel_type = ChannelType::kUnknown;
    }
  }
  return out;
}

namespace {

// Per-channel stance counts in corpus channel order.
struct ChannelTally {
  std::int64_t total = 0;
  ClassCounts by_stance{};
};

std::vector<ChannelTally> tally_channels(const Corpus& corpus) {
  std::vector<ChannelTally> tally(corpus.channels().size());
  std::unordered_map<const Channel*, std::size_t> pos;
  for (std::size_t i = 0; i < corpus.channels().size(); ++i) pos.emplace(&corpus.channels()[i], i);
  for (std::size_t i = 0; i < corpus.comments().size(); ++i) {
    auto& t = tally[pos.at(&corpus.channel_of_comment(i))];
    ++t.total;
    if (const auto& s = corpus.comments()[i].stance) ++t.by_stance[index(*s)];
  }
  return tally;
}

}  // namespace

std::vector<ChannelRankRow> channel_crossrank(const Corpus& corpus, const Taxonomy& taxonomy,
                                              std::size_t top_n) {
  const auto tally = tally_channels(corpus);
  std::vector<ChannelRankRow> rows;
  rows.reserve(tally.size());
  for (std::size_t i = 0; i < tally.size(); ++i) {
    const auto& ch = corpus.channels()[i];
    ChannelRankRow row;
    row.channel_id = ch.channel_id;
    row.name = ch.name;
    if (const auto* rec = taxonomy.find(ch.channel_id)) {
      row.in_taxonomy = true;
      row.type = rec->type;
      row.anj = rec->anj;
      if (!rec->name.empty()) row.name = rec->name;
    } else {
      spdlog::warn("channel {} ({}) has no taxonomy record; typed UNKNOWN", ch.channel_id, ch.name);
    }
    row.total = tally[i].total;
    row.pro_count = tally[i].by_stance[index(Stance::kFavorable)];
    row.anti_count = tally[i].by_stance[index(Stance::kAgainst)];
    rows.push_back(std::move(row));
  }

  auto by_name = [](const ChannelRankRow& a, const ChannelRankRow& b) {
    if (a.name != b.name) return a.name < b.name;
    return a.channel_id < b.channel_id;
  };
  auto assign_ranks = [&](auto count_of, auto set_rank) {
    std::vector<std::size_t> order(rows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (count_of(rows[a]) != count_of(rows[b])) return count_of(rows[a]) > count_of(rows[b]);
      return by_name(rows[a], rows[b]);
    });
    for (std::size_t r = 0; r < order.size(); ++r) set_rank(rows[order[r]], static_cast<int>(r + 1));
  };
  assign_ranks([](const ChannelRankRow& r) { return r.pro_count; },
               [](ChannelRankRow& r, int k) { r.pro_rank = k; });
  assign_ranks([](const ChannelRankRow& r) { return r.anti_count; },
               [](ChannelRankRow& r, int k) { r.anti_rank = k; });

  std::sort(rows.begin(), rows.end(), [&](const ChannelRankRow& a, const ChannelRankRow& b) {
    if (a.total != b.total) return a.total > b.total;
    return by_name(a, b);
  });
  if (rows.size() > top_n) rows.resize(top_n);
  return rows;
}

std::string_view to_string(VideoRankKey k) noexcept {
  switch (k) {
    case VideoRankKey::kAnti:
      return "ANTI";
    case VideoRankKey::kPro:
      return "PRO";
    case VideoRankKey::kPolarized:
      return "POLARIZED";
  }
  return "POLARIZED";
}

std::vector<VideoRankRow> video_rank(const Corpus& corpus, VideoRankKey key, std::size_t top_n) {
  const auto& videos = corpus.videos();
  std::vector<VideoRankRow> rows(videos.size());
  for (std::size_t i = 0; i < videos.size(); ++i) {
    rows[i].video_id = videos[i].video_id;
    rows[i].title = videos[i].title;
    rows[i].channel_id = videos[i].channel_id;
    rows[i].views = videos[i].view_count;
    rows[i].likes = videos[i].like_count;
  }
  for (const auto& c : corpus.comments()) {
    if (!c.stance || !is_polarized(*c.stance)) continue;
    auto& row = rows[*corpus.video_index(c.video_id)];
    if (*c.stance == Stance::kAgainst) {
      ++row.anti;
    } else {
      ++row.pro;
    }
  }
  for (auto& row : rows) {
    row.count = key == VideoRankKey::kAnti  ? row.anti
                : key == VideoRankKey::kPro ? row.pro
                                            : row.anti + row.pro;
  }
  std::erase_if(rows, [](const VideoRankRow& r) { return r.count == 0; });
  std::sort(rows.begin(), rows.end(), [](const VideoRankRow& a, const VideoRankRow& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.video_id < b.video_id;
  });
  if (rows.size() > top_n) rows.resize(top_n);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].rank = static_cast<int>(i + 1);
  return rows;
}

CertificationShare aggregate_share(const Corpus& corpus, const Taxonomy& taxonomy) {
  CertificationShare share;
  for (std::size_t i = 0; i < corpus.comments().size(); ++i) {
    if (corpus.comments()[i].stance != Stance::kAgainst) continue;
    ++share.against_total;
    const auto* rec = taxonomy.find(corpus.channel_of_comment(i).channel_id);
    if (!rec || rec->anj != AnjStatus::kYes) ++share.non_certified;
  }
  if (share.against_total > 0) {
    share.percent = 100.0 * static_cast<double>(share.non_certified) /
                    static_cast<double>(share.against_total);
  }
  return share;
}

}  // namespace vaxstance
