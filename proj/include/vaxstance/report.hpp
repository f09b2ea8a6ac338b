// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "vaxstance/analytics.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace vaxstance {

using json = nlohmann::ordered_json;

using Cell = std::variant<std::monostate, bool, std::int64_t, double, std::string>;

/// A named rectangular result with typed cells.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  bool operator==(const Table&) const = default;
};

json to_json(const Table& t);
Table table_from_json(const json& j);

/// Text form used in CSV output: empty for null, shortest round-trip
/// representation for doubles.
std::string format_cell(const Cell& c);

/// RFC 4180 CSV with a header row; fields are quoted only when needed.
std::string to_csv(const Table& t);
/// Parses RFC 4180 text into rows of fields (quoted fields may span lines).
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

struct AnalysisReport {
  json meta = json::object();
  std::vector<Table> tables;

  const Table& table(std::string_view name) const;
};

json to_json(const AnalysisReport& r);
AnalysisReport analysis_report_from_json(const json& j);

enum class ReportFormat { kCsv, kJson };
ReportFormat parse_report_format(std::string_view text);

/// Writes one file per table into `out_dir` (<name>.csv or <name>.json) and
/// returns the paths in table order.
std::vector<std::filesystem::path> emit_report(const AnalysisReport& report, ReportFormat format,
                                               const std::filesystem::path& out_dir);

struct AnalysisOptions {
  MonthRange window = kDefaultWindow;
  std::size_t top_n = 15;
  std::vector<RatioReference> references;
};

/// Runs every corpus-level analysis that its inputs allow. The lexicon
/// enables the mention heatmap and the taxonomy the channel tables; either
/// may be null.
AnalysisReport analyze_corpus(const Corpus& corpus, const CompiledLexicon* lexicon,
                              const Taxonomy* taxonomy, const AnalysisOptions& options = {});

}  // namespace vaxstance
