// SPDX-License-Identifier: Apache-2.0
#include "vaxstance/report.hpp"

#include "vaxstance/error.hpp"
#include "vaxstance/jsonl.hpp"

#include <sstream>

namespace vaxstance {

namespace fs = std::filesystem;

namespace {

json cell_to_json(const Cell& c) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return nullptr;
        } else {
          return v;
        }
      },
      c);
}

Cell cell_from_json(const json& j) {
  if (j.is_null()) return std::monostate{};
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  throw validation_error("unsupported table cell: " + j.dump());
}

Cell optional_cell(const std::optional<double>& v) {
  return v ? Cell(*v) : Cell(std::monostate{});
}

Cell text(std::string_view s) { return std::string(s); }

}  // namespace

json to_json(const Table& t) {
  json rows = json::array();
  for (const auto& row : t.rows) {
    json r = json::array();
    for (const auto& c : row) r.push_back(cell_to_json(c));
    rows.push_back(std::move(r));
  }
  return json{{"name", t.name}, {"columns", t.columns}, {"rows", rows}};
}

Table table_from_json(const json& j) {
  Table t;
  t.name = j.at("name").get<std::string>();
  t.columns = j.at("columns").get<std::vector<std::string>>();
  for (const auto& row : j.at("rows")) {
    if (row.size() != t.columns.size()) {
      throw validation_error("table " + t.name + ": row width differs from header");
    }
    std::vector<Cell> cells;
    for (const auto& c : row) cells.push_back(cell_from_json(c));
    t.rows.push_back(std::move(cells));
  }
  return t;
}

std::string format_cell(const Cell& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return {};
        } else if constexpr (std::is_same_v<T, std::string>) {
          return v;
        } else {
          return json(v).dump();
        }
      },
      c);
}

namespace {

void write_csv_field(std::ostringstream& out, const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) {
    out << field;
    return;
  }
  out << '"';
  for (char ch : field) {
    if (ch == '"') out << '"';
    out << ch;
  }
  out << '"';
}

}  // namespace

std::string to_csv(const Table& t) {
  std::ostringstream out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (i) out << ',';
    write_csv_field(out, t.columns[i]);
  }
  out << "\r\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      write_csv_field(out, format_cell(row[i]));
    }
    out << "\r\n";
  }
  return out.str();
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool row_started = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case '"':
        quoted = true;
        row_started = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        row_started = true;
        break;
      case '\r':
        break;
      case '\n':
        row.push_back(std::move(field));
        field.clear();
        rows.push_back(std::move(row));
        row.clear();
        row_started = false;
        break;
      default:
        field.push_back(ch);
        row_started = true;
    }
  }
  if (quoted) throw validation_error("unterminated quoted CSV field");
  if (row_started) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

const Table& AnalysisReport::table(std::string_view name) const {
  for (const auto& t : tables) {
    if (t.name == name) return t;
  }
  throw missing_input("report has no table " + std::string(name));
}

json to_json(const AnalysisReport& r) {
  json tables = json::array();
  for (const auto& t : r.tables) tables.push_back(to_json(t));
  return json{{"format_version", 1}, {"meta", r.meta}, {"tables", tables}};
}

AnalysisReport analysis_report_from_json(const json& j) {
  AnalysisReport r;
  r.meta = j.value("meta", json::object());
  for (const auto& t : j.at("tables")) r.tables.push_back(table_from_json(t));
  return r;
}

ReportFormat parse_report_format(std::string_view text) {
  if (text == "csv") return ReportFormat::kCsv;
  if (text == "json") return ReportFormat::kJson;
  throw validation_error("unknown report format '" + std::string(text) + "' (want csv|json)");
}

std::vector<fs::path> emit_report(const AnalysisReport& report, ReportFormat format,
                                  const fs::path& out_dir) {
  std::vector<fs::path> written;
  for (const auto& t : report.tables) {
    if (format == ReportFormat::kCsv) {
      written.push_back(out_dir / (t.name + ".csv"));
      write_text_file(written.back(), to_csv(t));
    } else {
      written.push_back(out_dir / (t.name + ".json"));
      write_json_file(written.back(), to_json(t));
    }
  }
  return written;
}

namespace {

Table engagement_table(const std::array<StanceEngagementRow, kNumClasses>& rows) {
  Table t{"stance_engagement",
          {"stance", "comments", "likes", "replies", "users", "likes_per_comment",
           "replies_per_comment", "likes_per_comment_1dp", "replies_per_comment_2dp"},
          {}};
  for (const auto& r : rows) {
    t.rows.push_back({text(to_string(r.stance)), r.comment_count, r.like_total, r.reply_total,
                      r.unique_users, optional_cell(r.likes_per_comment),
                      optional_cell(r.replies_per_comment),
                      r.likes_per_comment ? Cell(round_to(*r.likes_per_comment, 1)) : Cell{},
                      r.replies_per_comment ? Cell(round_to(*r.replies_per_comment, 2)) : Cell{}});
  }
  return t;
}

Table ratio_check_table(const std::vector<RatioCheck>& checks) {
  Table t{"published_ratio_checks",
          {"stance", "metric", "published", "computed", "decimals", "matches"},
          {}};
  for (const auto& c : checks) {
    t.rows.push_back({text(to_string(c.reference.stance)), c.reference.metric,
                      c.reference.published, optional_cell(c.computed),
                      static_cast<std::int64_t>(c.reference.decimals), c.matches});
  }
  return t;
}

Table polarized_table(const Corpus& corpus) {
  Table t{"polarized_by_period",
          {"period", "total", "polarized", "percent", "percent_2dp"},
          {}};
  for (Period p : {Period::kPrePandemic, Period::kPandemic, Period::kPostPandemic,
                   Period::kOutOfRange}) {
    const auto pp = polarized_proportion(corpus, p);
    t.rows.push_back({text(to_string(p)), pp.total, pp.polarized, optional_cell(pp.percent),
                      pp.percent ? Cell(round_to(*pp.percent, 2)) : Cell{}});
  }
  return t;
}

Table reply_table(const Corpus& corpus) {
  const ReplyIndex index(corpus);
  Table t{"reply_probabilities",
          {"period", "parent_stance", "reply_stance", "pairs", "probability"},
          {}};
  for (Period p : kInRangePeriods) {
    const auto m = reply_stance_matrix(corpus, index, p);
    for (std::size_t parent = 0; parent < 2; ++parent) {
      for (std::size_t reply = 0; reply < 2; ++reply) {
        t.rows.push_back({text(to_string(p)), text(to_string(stance_at(parent))),
                          text(to_string(stance_at(reply))), m.support[parent][reply],
                          m.probs[parent] ? Cell((*m.probs[parent])[reply]) : Cell{}});
      }
    }
  }
  return t;
}

Table heatmap_table(const Corpus& corpus, const CompiledLexicon& lexicon, const MonthRange& window) {
  Table t{"mention_heatmap",
          {"vaccine", "year", "side", "count", "zscore", "partial_year", "constant_series"},
          {}};
  for (Stance side : {Stance::kFavorable, Stance::kAgainst}) {
    for (const auto& s : mention_series(corpus, lexicon, side, window)) {
      for (const auto& [year, count] : s.counts) {
        t.rows.push_back({s.vaccine, static_cast<std::int64_t>(year), text(to_string(side)), count,
                          s.z.values.at(year), s.partial_years.contains(year), s.z.constant});
      }
    }
  }
  return t;
}

Table crossrank_table(const Corpus& corpus, const Taxonomy& taxonomy, std::size_t top_n) {
  Table t{"channel_crossrank",
          {"channel_id", "name", "type", "anj", "total", "pro_count", "pro_rank", "anti_count",
           "anti_rank"},
          {}};
  for (const auto& r : channel_crossrank(corpus, taxonomy, top_n)) {
    t.rows.push_back({r.channel_id, r.name, text(to_string(r.type)), text(to_string(r.anj)),
                      r.total, r.pro_count, static_cast<std::int64_t>(r.pro_rank), r.anti_count,
                      static_cast<std::int64_t>(r.anti_rank)});
  }
  return t;
}

Table video_table(const Corpus& corpus, VideoRankKey key, std::size_t top_n) {
  std::string name = "video_rank_" + std::string(to_string(key));
  for (auto& ch : name) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  Table t{name, {"rank", "video_id", "title", "count", "anti", "pro", "views", "likes"}, {}};
  for (const auto& r : video_rank(corpus, key, top_n)) {
    t.rows.push_back({static_cast<std::int64_t>(r.rank), r.video_id, r.title, r.count, r.anti,
                      r.pro, r.views, r.likes});
  }
  return t;
}

Table share_table(const Corpus& corpus, const Taxonomy& taxonomy) {
  const auto s = aggregate_share(corpus, taxonomy);
  return Table{"certification_share",
               {"against_total", "non_certified", "percent", "percent_1dp"},
               {{s.against_total, s.non_certified, optional_cell(s.percent),
                 s.percent ? Cell(round_to(*s.percent, 1)) : Cell{}}}};
}

}  // namespace

AnalysisReport analyze_corpus(const Corpus& corpus, const CompiledLexicon* lexicon,
                              const Taxonomy* taxonomy, const AnalysisOptions& options) {
  AnalysisReport report;
  report.meta = json{{"comments", corpus.comments().size()},
                     {"videos", corpus.videos().size()},
                     {"channels", corpus.channels().size()},
                     {"window", {{"first", options.window.first.to_string()},
                                 {"last", options.window.last.to_string()}}},
                     {"reply_period_basis", "reply timestamp"},
                     {"reply_denominator", "polarized replies only"},
                     {"zscore_sigma", "population"},
                     {"certified_means", "anj == yes"}};

  const auto engagement = stance_engagement_table(corpus);
  report.tables.push_back(engagement_table(engagement));
  if (!options.references.empty()) {
    report.tables.push_back(ratio_check_table(check_ratios(engagement, options.references)));
  }
  report.tables.push_back(polarized_table(corpus));
  report.tables.push_back(reply_table(corpus));
  if (lexicon) report.tables.push_back(heatmap_table(corpus, *lexicon, options.window));
  if (taxonomy) {
    report.tables.push_back(crossrank_table(corpus, *taxonomy, options.top_n));
    report.tables.push_back(share_table(corpus, *taxonomy));
  }
  for (auto key : {VideoRankKey::kAnti, VideoRankKey::kPro, VideoRankKey::kPolarized}) {
    report.tables.push_back(video_table(corpus, key, options.top_n));
  }
  return report;
}

}  // namespace vaxstance
