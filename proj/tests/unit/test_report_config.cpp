// SPDX-License-Identifier: Apache-2.0
#include "../support/fixtures.hpp"

#include "vaxstance/config.hpp"
#include "vaxstance/jsonl.hpp"
#include "vaxstance/report.hpp"
#include "vaxstance/run_manifest.hpp"

#include <doctest.h>

#include <map>

using namespace vaxstance;
namespace vt = vaxstance::testing;

namespace {

EnvLookup env_of(std::map<std::string, std::string> vars) {
  return [vars = std::move(vars)](const std::string& k) -> std::optional<std::string> {
    if (auto it = vars.find(k); it != vars.end()) return it->second;
    return std::nullopt;
  };
}

const EnvLookup kNoEnv = env_of({});

}  // namespace

TEST_SUITE("report") {

TEST_CASE("csv quoting and parsing") {
  const Table t{"demo",
                {"name", "count", "ratio", "flag", "missing"},
                {{std::string("plain"), std::int64_t{3}, 0.1, true, std::monostate{}},
                 {std::string("a,b \"quoted\"\nnext line"), std::int64_t{-4}, 1.0 / 3, false, std::monostate{}}}};
  const auto csv = to_csv(t);
  const auto rows = parse_csv(csv);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == std::vector<std::string>{"name", "count", "ratio", "flag", "missing"});
  CHECK(rows[1][0] == "plain");
  CHECK(rows[1][2] == "0.1");
  CHECK(rows[1][3] == "true");
  CHECK(rows[1][4].empty());
  CHECK(rows[2][0] == "a,b \"quoted\"\nnext line");
  CHECK(std::stod(rows[2][2]) == 1.0 / 3);  // shortest round trip keeps the exact double
  CHECK(parse_csv("x,\"y\"\"z\"\r\n1,2\r\n") ==
        std::vector<std::vector<std::string>>{{"x", "y\"z"}, {"1", "2"}});
  CHECK_THROWS_AS(parse_csv("\"unterminated"), Error);
}

TEST_CASE("json and csv emit the same tables") {
  const auto corpus = vt::period_share_corpus(1000, {136, 260, 288});
  const auto lex = compile_lexicon(default_lexicon_path());
  const auto report = analyze_corpus(corpus, &lex, nullptr);
  CHECK(report.table("polarized_by_period").rows.size() == 4);
  CHECK_THROWS_AS(report.table("channel_crossrank"), Error);

  const auto back = analysis_report_from_json(to_json(report));
  CHECK(back.tables == report.tables);

  const auto csv_dir = vt::temp_dir("emit_csv");
  const auto json_dir = vt::temp_dir("emit_json");
  const auto csv_files = emit_report(report, ReportFormat::kCsv, csv_dir);
  const auto json_files = emit_report(report, ReportFormat::kJson, json_dir);
  REQUIRE(csv_files.size() == json_files.size());
  for (std::size_t i = 0; i < csv_files.size(); ++i) {
    const auto table = table_from_json(read_json_file(json_files[i]));
    const auto rows = parse_csv(read_text_file(csv_files[i]));
    REQUIRE(rows.size() == table.rows.size() + 1);
    CHECK(rows[0] == table.columns);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      for (std::size_t c = 0; c < table.columns.size(); ++c) CHECK(rows[r + 1][c] == format_cell(table.rows[r][c]));
    }
  }
  CHECK(parse_report_format("csv") == ReportFormat::kCsv);
  CHECK_THROWS_AS(parse_report_format("xml"), Error);
}

TEST_CASE("polarized table rounds to two decimals") {
  const auto corpus = vt::period_share_corpus(5000, {681, 1301, 1442});
  const auto report = analyze_corpus(corpus, nullptr, nullptr);
  const auto& t = report.table("polarized_by_period");
  CHECK(std::get<double>(t.rows[0][4]) == doctest::Approx(13.62));
  CHECK(std::get<double>(t.rows[1][4]) == doctest::Approx(26.02));
  CHECK(std::get<double>(t.rows[2][4]) == doctest::Approx(28.84));
}

}  // TEST_SUITE

TEST_SUITE("config") {

TEST_CASE("defaults") {
  const auto c = parse_config("", "/base", kNoEnv);
  CHECK(c.annotation.per_month == 50);
  CHECK(c.selftrain.budget == 2004);
  CHECK(c.evaluation.folds == 5);
  CHECK(c.window.first == YearMonth{2018, 1});
  CHECK(c.selftrain.apportionment == Apportionment::kLargestRemainder);
}

TEST_CASE("parsing, relative paths and overrides") {
  const std::string text = R"(
# pipeline settings
[paths]
corpus = "data/corpus"
work_dir = /abs/work
[selftrain]
budget = 100
apportionment = sainte-lague
[scorer]
endpoint = http://127.0.0.1:9000
normalization = renormalize
)";
  auto c = parse_config(text, "/base", kNoEnv);
  CHECK(c.paths.corpus == std::filesystem::path("/base/data/corpus"));
  CHECK(c.paths.work_dir == std::filesystem::path("/abs/work"));
  CHECK(c.selftrain.budget == 100);
  CHECK(c.selftrain.apportionment == Apportionment::kSainteLague);
  CHECK(c.scorer.endpoint == "http://127.0.0.1:9000");
  CHECK(c.scorer.normalization == NormalizationMode::kRenormalize);

  c = parse_config(text, "/base", env_of({{"VAXSTANCE_SELFTRAIN_BUDGET", "7"}, {"VAXSTANCE_WINDOW_LAST", "2020-12"}}));
  CHECK(c.selftrain.budget == 7);
  CHECK(c.window.last == YearMonth{2020, 12});

  const auto dir = vt::temp_dir("config");
  write_text_file(dir / "run.toml", text);
  CHECK(load_config(dir / "run.toml", kNoEnv).paths.corpus == dir / "data/corpus");
}

TEST_CASE("rejections") {
  CHECK_THROWS_WITH_AS(parse_config("[ingest]\napi_key = abc\n", "/", kNoEnv), doctest::Contains("environment"), Error);
  CHECK_THROWS_AS(parse_config("[ingest]\nyoutube_api_key = abc\n", "/", kNoEnv), Error);
  CHECK_THROWS_WITH_AS(parse_config("[paths]\ncorpse = x\n", "/", kNoEnv), doctest::Contains("paths.corpse"), Error);
  CHECK_THROWS_AS(parse_config("budget = 3\n", "/", kNoEnv), Error);
  CHECK_THROWS_AS(parse_config("[selftrain]\nbudget = lots\n", "/", kNoEnv), Error);
  CHECK_THROWS_AS(parse_config("[selftrain]\nbudget = -1\n", "/", kNoEnv), Error);
  CHECK_THROWS_AS(parse_config("[evaluation]\nfolds = 2\n", "/", kNoEnv), Error);
  CHECK_THROWS_AS(parse_config("[window]\nfirst = 2020-05\nlast = 2020-01\n", "/", kNoEnv), Error);
  CHECK_THROWS_AS(parse_config("", "/", env_of({{"VAXSTANCE_ANNOTATION_RATERS", "1"}})), Error);
  CHECK_THROWS_AS(load_config("/definitely/not/here.toml", kNoEnv), Error);
}

}  // TEST_SUITE

TEST_SUITE("manifest") {

TEST_CASE("run manifest hashes inputs and is stable apart from its timestamp") {
  const auto dir = vt::temp_dir("manifest_run");
  write_text_file(dir / "in.txt", "abc");
  std::filesystem::create_directories(dir / "tree/sub");
  write_text_file(dir / "tree/a.txt", "1");
  write_text_file(dir / "tree/sub/b.txt", "2");
  const auto config = to_json(parse_config("", "/base", kNoEnv));

  auto make = [&] {
    RunManifest m("sample", {"--out", "x"}, config);
    m.add_input(dir / "in.txt");
    m.add_input(dir / "tree");
    m.add_output(dir / "absent.txt");
    m.set("selected", 3);
    auto j = m.to_json();
    j.erase("run_timestamp");
    return j;
  };
  const auto a = make();
  CHECK(a == make());
  // SHA-256 of "abc".
  CHECK(a["inputs"][0]["sha256"] == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(a["inputs"][1]["files"] == 2);
  CHECK(a["outputs"][0]["sha256"].is_null());
  CHECK(a["details"]["selected"] == 3);
  CHECK(a["tool_version"] == kToolVersion);

  write_text_file(dir / "tree/sub/b.txt", "3");
  CHECK(make()["inputs"][1]["sha256"] != a["inputs"][1]["sha256"]);
}

}  // TEST_SUITE
