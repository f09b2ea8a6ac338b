// SPDX-License-Identifier: Apache-2.0
#include "fixtures.hpp"

#include "vaxstance/random.hpp"

#include <chrono>
#include <unistd.h>

namespace vaxstance::testing {

namespace fs = std::filesystem;

Comment make_comment(std::string id, std::string video_id, std::string author,
                     std::optional<Stance> stance, Timestamp at, std::int64_t likes,
                     std::int64_t replies, std::optional<std::string> parent, std::string text) {
  Comment c;
  c.comment_id = std::move(id);
  c.video_id = std::move(video_id);
  c.author_id = std::move(author);
  c.parent_id = std::move(parent);
  c.text = std::move(text);
  c.published_at = at;
  c.like_count = likes;
  c.reply_count = replies;
  c.stance = stance;
  return c;
}

Timestamp mid_period(Period p) {
  switch (p) {
    case Period::kPrePandemic:
      return make_timestamp(2019, 6, 15, 12);
    case Period::kPandemic:
      return make_timestamp(2021, 6, 15, 12);
    case Period::kPostPandemic:
      return make_timestamp(2023, 10, 15, 12);
    default:
      return make_timestamp(2017, 6, 15, 12);
  }
}

namespace {

Channel plain_channel(std::string id, std::string name) {
  Channel ch;
  ch.channel_id = std::move(id);
  ch.name = std::move(name);
  return ch;
}

Video plain_video(std::string id, std::string channel, std::string title) {
  Video v;
  v.video_id = std::move(id);
  v.channel_id = std::move(channel);
  v.title = std::move(title);
  v.published_at = make_timestamp(2019, 1, 1);
  return v;
}

// Spreads `total` over `n` items: each gets total / n, the first total % n
// get one more.
std::int64_t share(std::int64_t total, std::int64_t n, std::int64_t i) {
  return total / n + (i < total % n ? 1 : 0);
}

}  // namespace

Corpus reference_scale_corpus() {
  std::vector<Channel> channels{plain_channel("ch", "Reference channel")};
  std::vector<Video> videos;
  const char* video_ids[] = {"vF", "vA", "vI"};
  for (auto* id : video_ids) videos.push_back(plain_video(id, "ch", "Vacina"));

  // Periods for the polarized comments are handed out in order F then A;
  // inconclusive comments fill each period up to its total.
  std::array<std::int64_t, 3> polar_left{}, incon_left{};
  for (std::size_t p = 0; p < 3; ++p) {
    polar_left[p] = kTableTwoTotals[p].polarized;
    incon_left[p] = kTableTwoTotals[p].total - kTableTwoTotals[p].polarized;
  }
  auto next_period = [](std::array<std::int64_t, 3>& left) {
    for (std::size_t p = 0; p < 3; ++p) {
      if (left[p] > 0) {
        --left[p];
        return kTableTwoTotals[p].period;
      }
    }
    return Period::kOutOfRange;
  };

  std::vector<Comment> comments;
  std::int64_t total = 0;
  for (const auto& t : kTableOneTotals) total += t.comments;
  comments.reserve(static_cast<std::size_t>(total));
  std::int64_t serial = 0;
  for (std::size_t s = 0; s < 3; ++s) {
    const Stance stance = stance_at(s);
    const auto& t = kTableOneTotals[s];
    const std::string prefix = std::string("u") + "FAI"[s];
    for (std::int64_t i = 0; i < t.comments; ++i) {
      const Period p = is_polarized(stance) ? next_period(polar_left) : next_period(incon_left);
      comments.push_back(make_comment("c" + std::to_string(serial++), video_ids[s],
                                      prefix + std::to_string(i % t.users), stance,
                                      mid_period(p), share(t.likes, t.comments, i),
                                      share(t.replies, t.comments, i)));
    }
  }
  return Corpus(std::move(channels), std::move(videos), std::move(comments));
}

Corpus period_share_corpus(std::int64_t per_period, const std::array<std::int64_t, 3>& polarized) {
  std::vector<Channel> channels{plain_channel("ch", "Channel")};
  std::vector<Video> videos{plain_video("v1", "ch", "Vacina")};
  std::vector<Comment> comments;
  std::int64_t serial = 0;
  for (std::size_t p = 0; p < 3; ++p) {
    for (std::int64_t i = 0; i < per_period; ++i) {
      Stance s = Stance::kInconclusive;
      if (i < polarized[p]) s = i % 2 == 0 ? Stance::kFavorable : Stance::kAgainst;
      comments.push_back(make_comment("c" + std::to_string(serial++), "v1",
                                      "u" + std::to_string(i % 97), s,
                                      mid_period(kInRangePeriods[p]), i % 5, 0, std::nullopt,
                                      "comentario sobre vacina"));
    }
  }
  return Corpus(std::move(channels), std::move(videos), std::move(comments));
}

Corpus reply_tree_corpus(const std::array<PairCounts, 3>& per_period) {
  std::vector<Channel> channels{plain_channel("ch", "Channel")};
  std::vector<Video> videos{plain_video("v1", "ch", "Vacina")};
  std::vector<Comment> comments;
  std::int64_t serial = 0;
  auto add = [&](std::optional<Stance> s, Timestamp at, std::optional<std::string> parent) {
    comments.push_back(make_comment("c" + std::to_string(serial++), "v1", "u", s, at, 0, 0,
                                    std::move(parent)));
    return comments.back().comment_id;
  };
  constexpr int kParentsPerStance = 4;
  for (std::size_t p = 0; p < 3; ++p) {
    const Timestamp t0 = mid_period(kInRangePeriods[p]);
    for (std::size_t ps = 0; ps < 2; ++ps) {
      std::vector<std::string> parents;
      for (int j = 0; j < kParentsPerStance; ++j) parents.push_back(add(stance_at(ps), t0, std::nullopt));
      std::int64_t n = 0;
      for (std::size_t rs = 0; rs < 2; ++rs) {
        for (std::int64_t i = 0; i < per_period[p][ps][rs]; ++i, ++n) {
          add(stance_at(rs), t0 + std::chrono::hours(1 + n), parents[n % kParentsPerStance]);
        }
      }
      // Pairs involving an inconclusive comment never count.
      add(Stance::kInconclusive, t0 + std::chrono::minutes(5), parents.front());
    }
    const auto neutral = add(Stance::kInconclusive, t0, std::nullopt);
    add(Stance::kFavorable, t0 + std::chrono::minutes(7), neutral);
  }
  return Corpus(std::move(channels), std::move(videos), std::move(comments));
}

std::array<PairCounts, 3> published_reply_counts() {
  return {{
      {{{69, 31}, {0, 0}}},
      {{{57, 43}, {43, 57}}},
      {{{50, 50}, {33, 67}}},
  }};
}

std::vector<ChannelSeed> published_channel_seeds() {
  using T = ChannelType;
  using A = AnjStatus;
  return {
      {"UC01", "Julio Pereira", T::kSC, A::kNotApplicable, 29'345, 27'121},
      {"UC02", "Olá Ciência", T::kSC, A::kNotApplicable, 19'487, 21'117},
      {"UC03", "BBC", T::kLNM, A::kNotApplicable, 12'569, 17'934},
      {"UC04", "UOL", T::kLNM, A::kYes, 9'451, 14'052},
      {"UC05", "TV Cultura", T::kLNM, A::kYes, 5'589, 10'117},
      {"UC06", "Band", T::kLNM, A::kNo, 5'740, 8'962},
      {"UC07", "SBT", T::kLNM, A::kNo, 3'988, 9'059},
      {"UC08", "CNN", T::kLNM, A::kNotApplicable, 3'866, 5'280},
      {"UC09", "Jovem Pan", T::kLNM, A::kNo, 2'290, 5'916},
      {"UC10", "Prof. Lysandro", T::kSC, A::kNotApplicable, 2'359, 5'716},
      {"UC11", "Veja", T::kDC, A::kNo, 1'762, 3'062},
      {"UC12", "Record", T::kLNM, A::kNo, 1'506, 2'632},
      {"UC13", "Spotniks", T::kDC, A::kNo, 1'822, 2'219},
      {"UC14", "Unknown Facts", T::kDC, A::kNo, 1'638, 2'387},
      {"UC15", "TV Brasil", T::kLNM, A::kNotApplicable, 1'400, 1'981},
      {"UC16", "Átila", T::kSC, A::kNotApplicable, 1'551, 1'900},
      {"UC17", "Canal Pequeno", T::kDC, A::kNo, 120, 95, 400},
      {"UC18", "Outro Canal", T::kLNM, A::kYes, 80, 60, 300},
  };
}

Corpus channel_corpus(const std::vector<ChannelSeed>& seeds) {
  std::vector<Channel> channels;
  std::vector<Video> videos;
  std::vector<Comment> comments;
  std::int64_t serial = 0;
  const Timestamp at = mid_period(Period::kPandemic);
  for (const auto& s : seeds) {
    Channel ch = plain_channel(s.channel_id, s.name);
    ch.channel_type = s.type;
    ch.anj_certified = s.anj;
    channels.push_back(ch);
    const std::string vid = "v" + s.channel_id;
    videos.push_back(plain_video(vid, s.channel_id, "Vacina"));
    auto emit = [&](Stance st, std::int64_t n) {
      for (std::int64_t i = 0; i < n; ++i) {
        comments.push_back(make_comment("c" + std::to_string(serial++), vid, "u", st, at));
      }
    };
    emit(Stance::kFavorable, s.pro);
    emit(Stance::kAgainst, s.anti);
    emit(Stance::kInconclusive, s.inconclusive);
  }
  return Corpus(std::move(channels), std::move(videos), std::move(comments));
}

Taxonomy taxonomy_of(const std::vector<ChannelSeed>& seeds) {
  std::vector<TaxonomyRecord> records;
  for (const auto& s : seeds) records.push_back({s.channel_id, s.name, s.anj, s.type});
  return Taxonomy(std::move(records));
}

std::vector<VideoSeed> published_video_seeds() {
  return {
      {"bfbyImPA938", 3'796, 1'429, 509'383, 23'922},
      {"jAd-GxRdBbY", 3'027, 1'989, 402'118, 18'204},
      {"Hu4jz-pPlcQ", 3'109, 1'077, 377'950, 15'310},
      {"L24UIaHb_8A", 2'219, 1'822, 298'004, 20'118},
      {"jrSNYg6ngnY", 2'138, 1'378, 251'771, 9'876},
      {"smallvid001", 40, 35, 1'200, 80},
  };
}

Corpus video_corpus(const std::vector<VideoSeed>& seeds) {
  std::vector<Channel> channels{plain_channel("ch", "Channel")};
  std::vector<Video> videos;
  std::vector<Comment> comments;
  std::int64_t serial = 0;
  const Timestamp at = mid_period(Period::kPandemic);
  for (const auto& s : seeds) {
    Video v = plain_video(s.video_id, "ch", "Video " + s.video_id);
    v.view_count = s.views;
    v.like_count = s.likes;
    videos.push_back(v);
    for (std::int64_t i = 0; i < s.anti; ++i) {
      comments.push_back(make_comment("c" + std::to_string(serial++), s.video_id, "u", Stance::kAgainst, at));
    }
    for (std::int64_t i = 0; i < s.pro; ++i) {
      comments.push_back(make_comment("c" + std::to_string(serial++), s.video_id, "u", Stance::kFavorable, at));
    }
    comments.push_back(make_comment("c" + std::to_string(serial++), s.video_id, "u", Stance::kInconclusive, at));
  }
  return Corpus(std::move(channels), std::move(videos), std::move(comments));
}

namespace {

std::string cue_token(std::size_t cls, char kind, std::size_t j) {
  static const char* prefixes[] = {"fav", "ant", "inc"};
  std::string t = std::string(prefixes[cls]) + kind;
  t += static_cast<char>('a' + j / 26);
  t += static_cast<char>('a' + j % 26);
  return t;
}

std::string filler(std::size_t j) {
  std::string t = "neutro";
  t += static_cast<char>('a' + j / 26);
  t += static_cast<char>('a' + j % 26);
  return t;
}

}  // namespace

CueWorld make_cue_world(std::uint64_t seed, const std::array<int, 3>& labeled_per_class,
                        int pool_size, int held_out_per_class) {
  constexpr std::size_t kStrong = 3, kWeak = 40, kFillers = 60;
  Rng rng(seed);
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(uniform_below(rng, n)); };
  auto fillers = [&](int n) {
    std::string s;
    for (int i = 0; i < n; ++i) s += " " + filler(pick(kFillers));
    return s;
  };

  CueWorld w;
  for (std::size_t c = 0; c < 3; ++c) {
    for (int i = 0; i < labeled_per_class[c]; ++i) {
      w.labeled.emplace_back(cue_token(c, 's', pick(kStrong)) + fillers(3), stance_at(c));
    }
  }
  for (int i = 0; i < pool_size; ++i) {
    const std::size_t c = pick(3);
    std::string t = fillers(1) + " " + cue_token(c, 's', pick(kStrong)) + " " +
                    cue_token(c, 'w', pick(kWeak)) + " " + cue_token(c, 'w', pick(kWeak)) +
                    fillers(1);
    char id[16];
    std::snprintf(id, sizeof id, "p%06d", i);
    w.pool.emplace_back(id, std::move(t));
    w.pool_truth.push_back(stance_at(c));
  }
  for (std::size_t c = 0; c < 3; ++c) {
    for (int i = 0; i < held_out_per_class; ++i) {
      std::string t = i % 2 == 0 ? cue_token(c, 's', pick(kStrong)) + fillers(3)
                                 : cue_token(c, 'w', pick(kWeak)) + " " +
                                       cue_token(c, 'w', pick(kWeak)) + fillers(2);
      w.held_out.emplace_back(std::move(t), stance_at(c));
    }
  }
  return w;
}

fs::path temp_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() /
                       ("vaxstance_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace vaxstance::testing
