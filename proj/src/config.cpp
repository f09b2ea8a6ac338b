// SPDX-License-Identifier: Apache-2.0
#include "vaxstance/config.hpp"

#include "vaxstance/error.hpp"
#include "vaxstance/jsonl.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cstdlib>
#include <map>
#include <sstream>

namespace vaxstance {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

EnvLookup process_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    if (const char* v = std::getenv(name.c_str())) return std::string(v);
    return std::nullopt;
  };
}

namespace {

// Drops an unquoted trailing "# comment" and surrounding quotes.
std::string clean_value(std::string raw) {
  bool in_quotes = false;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] == '"') in_quotes = !in_quotes;
    if (raw[i] == '#' && !in_quotes) {
      raw.resize(i);
      break;
    }
  }
  const auto first = raw.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  raw = raw.substr(first, raw.find_last_not_of(" \t") - first + 1);
  if (raw.size() >= 2 && (raw.front() == '"' || raw.front() == '\'') && raw.back() == raw.front()) {
    raw = raw.substr(1, raw.size() - 2);
  }
  return raw;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  T out{};
  in >> out;
  if (!in || !in.eof()) throw validation_error("config " + key + ": not a number: '" + value + "'");
  return out;
}

using Setter = std::function<void(PipelineConfig&, const std::string&)>;

std::map<std::string, Setter> setters(const fs::path& base) {
  auto path_setter = [base](fs::path PipelineConfig::Paths::*field) -> Setter {
    return [base, field](PipelineConfig& c, const std::string& v) {
      fs::path p(v);
      c.paths.*field = (p.empty() || p.is_absolute()) ? p : base / p;
    };
  };
  auto abs_path = [base](const std::string& v) {
    fs::path p(v);
    return (p.empty() || p.is_absolute()) ? p : base / p;
  };
  std::map<std::string, Setter> s;
  s["paths.corpus"] = path_setter(&PipelineConfig::Paths::corpus);
  s["paths.lexicon"] = path_setter(&PipelineConfig::Paths::lexicon);
  s["paths.templates"] = path_setter(&PipelineConfig::Paths::templates);
  s["paths.taxonomy"] = path_setter(&PipelineConfig::Paths::taxonomy);
  s["paths.scores"] = path_setter(&PipelineConfig::Paths::scores);
  s["paths.labels"] = path_setter(&PipelineConfig::Paths::labels);
  s["paths.work_dir"] = path_setter(&PipelineConfig::Paths::work_dir);
  s["window.first"] = [](PipelineConfig& c, const std::string& v) { c.window.first = parse_year_month(v); };
  s["window.last"] = [](PipelineConfig& c, const std::string& v) { c.window.last = parse_year_month(v); };
  s["annotation.per_month"] = [](PipelineConfig& c, const std::string& v) {
    c.annotation.per_month = parse_number<int>("annotation.per_month", v);
  };
  s["annotation.raters"] = [](PipelineConfig& c, const std::string& v) {
    c.annotation.raters = parse_number<int>("annotation.raters", v);
  };
  s["annotation.seed"] = [](PipelineConfig& c, const std::string& v) {
    c.annotation.seed = parse_number<std::uint64_t>("annotation.seed", v);
  };
  s["selftrain.budget"] = [](PipelineConfig& c, const std::string& v) {
    c.selftrain.budget = parse_number<std::int64_t>("selftrain.budget", v);
  };
  s["selftrain.apportionment"] = [](PipelineConfig& c, const std::string& v) {
    if (v == "largest-remainder") {
      c.selftrain.apportionment = Apportionment::kLargestRemainder;
    } else if (v == "sainte-lague") {
      c.selftrain.apportionment = Apportionment::kSainteLague;
    } else {
      throw validation_error("selftrain.apportionment must be largest-remainder or sainte-lague");
    }
  };
  s["selftrain.rounds"] = [](PipelineConfig& c, const std::string& v) {
    c.selftrain.rounds = parse_number<int>("selftrain.rounds", v);
  };
  s["evaluation.folds"] = [](PipelineConfig& c, const std::string& v) {
    c.evaluation.folds = parse_number<int>("evaluation.folds", v);
  };
  s["evaluation.seed"] = [](PipelineConfig& c, const std::string& v) {
    c.evaluation.seed = parse_number<std::uint64_t>("evaluation.seed", v);
  };
  s["evaluation.confidence"] = [](PipelineConfig& c, const std::string& v) {
    c.evaluation.confidence = parse_number<double>("evaluation.confidence", v);
  };
  s["evaluation.patience"] = [](PipelineConfig& c, const std::string& v) {
    c.evaluation.patience = parse_number<int>("evaluation.patience", v);
  };
  s["scorer.endpoint"] = [](PipelineConfig& c, const std::string& v) { c.scorer.endpoint = v; };
  s["scorer.path"] = [](PipelineConfig& c, const std::string& v) { c.scorer.path = v; };
  s["scorer.batch_size"] = [](PipelineConfig& c, const std::string& v) {
    c.scorer.batch_size = parse_number<std::size_t>("scorer.batch_size", v);
  };
  s["scorer.max_in_flight"] = [](PipelineConfig& c, const std::string& v) {
    c.scorer.max_in_flight = parse_number<std::size_t>("scorer.max_in_flight", v);
  };
  s["scorer.timeout_ms"] = [](PipelineConfig& c, const std::string& v) {
    c.scorer.timeout_ms = parse_number<int>("scorer.timeout_ms", v);
  };
  s["scorer.normalization"] = [](PipelineConfig& c, const std::string& v) {
    if (v == "strict") {
      c.scorer.normalization = NormalizationMode::kStrict;
    } else if (v == "renormalize") {
      c.scorer.normalization = NormalizationMode::kRenormalize;
    } else {
      throw validation_error("scorer.normalization must be strict or renormalize");
    }
  };
  s["scorer.cue_table"] = [abs_path](PipelineConfig& c, const std::string& v) {
    c.scorer.cue_table = abs_path(v);
  };
  s["scorer.mock_smoothing"] = [](PipelineConfig& c, const std::string& v) {
    c.scorer.mock_smoothing = parse_number<double>("scorer.mock_smoothing", v);
  };
  s["ingest.base_url"] = [](PipelineConfig& c, const std::string& v) { c.ingest.base_url = v; };
  s["ingest.fixture_dir"] = [abs_path](PipelineConfig& c, const std::string& v) {
    c.ingest.fixture_dir = abs_path(v);
  };
  s["ingest.max_results"] = [](PipelineConfig& c, const std::string& v) {
    c.ingest.max_results = parse_number<int>("ingest.max_results", v);
  };
  s["ingest.parallelism"] = [](PipelineConfig& c, const std::string& v) {
    c.ingest.parallelism = parse_number<int>("ingest.parallelism", v);
  };
  s["ingest.region"] = [](PipelineConfig& c, const std::string& v) { c.ingest.region = v; };
  s["ingest.language"] = [](PipelineConfig& c, const std::string& v) { c.ingest.language = v; };
  s["service.bind"] = [](PipelineConfig& c, const std::string& v) { c.service.bind = v; };
  s["service.port"] = [](PipelineConfig& c, const std::string& v) {
    c.service.port = parse_number<int>("service.port", v);
  };
  s["service.batch_size"] = [](PipelineConfig& c, const std::string& v) {
    c.service.batch_size = parse_number<std::size_t>("service.batch_size", v);
  };
  s["analysis.top_n"] = [](PipelineConfig& c, const std::string& v) {
    c.analysis.top_n = parse_number<std::size_t>("analysis.top_n", v);
  };
  return s;
}

std::string env_name(const std::string& dotted) {
  std::string name = "VAXSTANCE_";
  for (char ch : dotted) {
    name.push_back(ch == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
  }
  return name;
}

void validate(const PipelineConfig& c) {
  if (c.window.last < c.window.first) throw validation_error("window.last precedes window.first");
  if (c.annotation.per_month < 0) throw validation_error("annotation.per_month must be >= 0");
  if (c.annotation.raters < 2) throw validation_error("annotation.raters must be >= 2");
  if (c.selftrain.budget < 0) throw validation_error("selftrain.budget must be >= 0");
  if (c.selftrain.rounds < 1) throw validation_error("selftrain.rounds must be >= 1");
  if (c.evaluation.folds < 3) throw validation_error("evaluation.folds must be >= 3");
  if (!(c.evaluation.confidence > 0.0 && c.evaluation.confidence < 1.0)) {
    throw validation_error("evaluation.confidence must be in (0, 1)");
  }
  if (c.scorer.batch_size == 0 || c.scorer.max_in_flight == 0) {
    throw validation_error("scorer.batch_size and scorer.max_in_flight must be positive");
  }
  if (!(c.scorer.mock_smoothing > 0.0 && c.scorer.mock_smoothing < 1.0)) {
    throw validation_error("scorer.mock_smoothing must be in (0, 1)");
  }
  if (c.ingest.max_results < 1 || c.ingest.parallelism < 1) {
    throw validation_error("ingest.max_results and ingest.parallelism must be positive");
  }
}

}  // namespace

PipelineConfig parse_config(const std::string& text, const fs::path& base_dir,
                            const EnvLookup& env) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw validation_error(std::string("config: ") + e.what());
  }
  PipelineConfig config;
  const auto table = setters(base_dir);
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw validation_error("config: key '" + section + "' must live inside a [section]");
    }
    for (const auto& [key, node] : body) {
      const std::string dotted = section + "." + key;
      if (key == "api_key" || key.ends_with("_api_key")) {
        throw validation_error("config: " + dotted +
                               " looks like a secret; supply it through the environment");
      }
      auto it = table.find(dotted);
      if (it == table.end()) throw validation_error("config: unknown key " + dotted);
      it->second(config, clean_value(node.data()));
    }
  }
  for (const auto& [dotted, setter] : table) {
    if (auto v = env(env_name(dotted))) setter(config, clean_value(*v));
  }
  validate(config);
  return config;
}

PipelineConfig load_config(const fs::path& path, const EnvLookup& env) {
  const auto text = read_text_file(path);
  return parse_config(text, path.has_parent_path() ? path.parent_path() : fs::path("."), env);
}

json to_json(const PipelineConfig& c) {
  return json{
      {"paths",
       {{"corpus", c.paths.corpus.string()},
        {"lexicon", c.paths.lexicon.string()},
        {"templates", c.paths.templates.string()},
        {"taxonomy", c.paths.taxonomy.string()},
        {"scores", c.paths.scores.string()},
        {"labels", c.paths.labels.string()},
        {"work_dir", c.paths.work_dir.string()}}},
      {"window", {{"first", c.window.first.to_string()}, {"last", c.window.last.to_string()}}},
      {"annotation",
       {{"per_month", c.annotation.per_month},
        {"raters", c.annotation.raters},
        {"seed", c.annotation.seed}}},
      {"selftrain",
       {{"budget", c.selftrain.budget},
        {"apportionment", c.selftrain.apportionment == Apportionment::kLargestRemainder
                              ? "largest-remainder"
                              : "sainte-lague"},
        {"rounds", c.selftrain.rounds}}},
      {"evaluation",
       {{"folds", c.evaluation.folds},
        {"seed", c.evaluation.seed},
        {"confidence", c.evaluation.confidence},
        {"patience", c.evaluation.patience}}},
      {"scorer",
       {{"endpoint", c.scorer.endpoint},
        {"path", c.scorer.path},
        {"batch_size", c.scorer.batch_size},
        {"max_in_flight", c.scorer.max_in_flight},
        {"timeout_ms", c.scorer.timeout_ms},
        {"normalization",
         c.scorer.normalization == NormalizationMode::kStrict ? "strict" : "renormalize"},
        {"cue_table", c.scorer.cue_table.string()},
        {"mock_smoothing", c.scorer.mock_smoothing}}},
      {"ingest",
       {{"base_url", c.ingest.base_url},
        {"fixture_dir", c.ingest.fixture_dir.string()},
        {"max_results", c.ingest.max_results},
        {"parallelism", c.ingest.parallelism},
        {"region", c.ingest.region},
        {"language", c.ingest.language}}},
      {"service",
       {{"bind", c.service.bind}, {"port", c.service.port}, {"batch_size", c.service.batch_size}}},
      {"analysis", {{"top_n", c.analysis.top_n}}},
  };
}

}  // namespace vaxstance
