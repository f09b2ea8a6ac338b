// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "vaxstance/scorer.hpp"
#include "vaxstance/self_training.hpp"
#include "vaxstance/timeutil.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

namespace vaxstance {

using json = nlohmann::ordered_json;

/// Every knob the pipeline reads. Defaults reproduce the reference run.
struct PipelineConfig {
  struct Paths {
    std::filesystem::path corpus = "corpus";
    std::filesystem::path lexicon;   // empty: the shipped default
    std::filesystem::path templates; // empty: the shipped default
    std::filesystem::path taxonomy;
    std::filesystem::path scores;    // offline scores.jsonl
    std::filesystem::path labels = "labels.jsonl";
    std::filesystem::path work_dir = "work";
  } paths;

  MonthRange window{{2018, 1}, {2024, 7}};

  struct Annotation {
    int per_month = 50;
    int raters = 3;
    std::uint64_t seed = 20180101;
  } annotation;

  struct SelfTraining {
    std::int64_t budget = 2004;
    Apportionment apportionment = Apportionment::kLargestRemainder;
    int rounds = 1;
  } selftrain;

  struct Evaluation {
    int folds = 5;
    std::uint64_t seed = 5;
    double confidence = 0.95;
    int patience = 3;
  } evaluation;

  struct Scorer {
    std::string endpoint;  // empty: use offline scores or the mock
    std::string path = "/score";
    std::size_t batch_size = 128;
    std::size_t max_in_flight = 4;
    int timeout_ms = 30000;
    NormalizationMode normalization = NormalizationMode::kStrict;
    std::filesystem::path cue_table;  // mock scorer cues (JSON)
    double mock_smoothing = 0.1;
  } scorer;

  struct Ingest {
    std::string base_url = "https://www.googleapis.com/youtube/v3";
    std::filesystem::path fixture_dir;  // non-empty: replay recorded responses
    int max_results = 50;
    int parallelism = 4;
    std::string region = "BR";
    std::string language = "pt";
  } ingest;

  struct Service {
    std::string bind = "127.0.0.1";
    int port = 8080;
    std::size_t batch_size = 20;
  } service;

  struct Analysis {
    std::size_t top_n = 15;
  } analysis;
};

/// Looks up environment variables; injectable for tests.
using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
EnvLookup process_env();

/// Reads a key = value file with [section] headers (a TOML subset: strings
/// may be quoted, '#' starts a comment). Unknown keys are errors. Any key
/// can be overridden by VAXSTANCE_<SECTION>_<KEY>. Relative paths resolve
/// against the config file's directory. Secrets are never read from the
/// file: an api_key entry is rejected.
PipelineConfig load_config(const std::filesystem::path& path, const EnvLookup& env = process_env());

/// Parses config text; relative paths resolve against `base_dir`.
PipelineConfig parse_config(const std::string& text, const std::filesystem::path& base_dir,
                            const EnvLookup& env = process_env());

/// Canonical JSON form (used for the run manifest's config hash).
json to_json(const PipelineConfig& c);

}  // namespace vaxstance
