// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "vaxstance/stance.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace vaxstance {

using json = nlohmann::ordered_json;

struct FoldRoles {
  std::vector<int> train;
  int validation = 0;
  int test = 0;
};

struct FoldPlan {
  int k = 5;
  std::uint64_t seed = 0;
  /// (example id, fold) in the order the examples were supplied.
  std::vector<std::pair<std::string, int>> assignments;
  /// Iteration i validates on fold i and tests on fold (i + 1) mod k.
  std::vector<FoldRoles> rotation;

  /// Ids assigned to `fold`, in assignment order.
  std::vector<std::string> fold_members(int fold) const;
};

/// Stratified assignment. Each class is shuffled with the seed and dealt
/// round-robin; the dealing position carries over from one class to the
/// next so fold sizes stay balanced overall. Needs k >= 3 and at least k
/// examples of every class present; ids must be unique.
FoldPlan make_fold_plan(std::span<const std::pair<std::string, Stance>> labels, int k,
                        std::uint64_t seed);

json to_json(const FoldPlan& plan);
FoldPlan fold_plan_from_json(const json& j);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t support = 0;    // true instances
  std::int64_t predicted = 0;  // predicted instances
  bool precision_undefined = false;  // nothing predicted as this class
  bool recall_undefined = false;     // class absent from the truth
  bool absent = false;               // absent from truth and predictions
};

struct MetricReport {
  std::array<ClassMetrics, kNumClasses> per_class{};
  double macro_f1 = 0.0;
  double accuracy = 0.0;
  std::size_t n = 0;
};

/// One-vs-rest metrics. Undefined ratios are reported as 0 and flagged.
MetricReport compute_metrics(std::span<const Stance> y_true, std::span<const Stance> y_pred);

json to_json(const MetricReport& r);

/// Names of the scalar metrics a report carries, in output order.
std::vector<std::string> metric_names();
/// Value of a named metric ("accuracy", "macro_f1", "FAVORABLE.f1", ...).
double metric_value(const MetricReport& r, const std::string& name);

struct IntervalEstimate {
  double mean = 0.0;
  double stddev = 0.0;      // sample standard deviation (n - 1)
  double half_width = 0.0;  // t(1 - alpha/2, n - 1) * s / sqrt(n)
  std::vector<double> values;
};

/// Mean and Student-t confidence interval. Needs >= 2 values. The sums run
/// over sorted values, so the result does not depend on input order.
IntervalEstimate t_interval(std::span<const double> values, double confidence = 0.95);

struct AggregateReport {
  std::size_t folds = 0;
  double confidence = 0.95;
  std::vector<std::pair<std::string, IntervalEstimate>> metrics;

  const IntervalEstimate& at(const std::string& name) const;
};

/// Per-metric mean and CI over fold reports. Needs >= 2 reports.
AggregateReport aggregate_folds(std::span<const MetricReport> reports, double confidence = 0.95);

json to_json(const AggregateReport& r);

struct EarlyStopResult {
  int best_epoch = 0;
  double best_value = 0.0;
  std::optional<int> stop_epoch;  // absent when training would run to the end
};

/// Tracks validation macro F1 per epoch. The best epoch is the earliest
/// maximum; stopping fires once `patience` consecutive epochs fail to beat
/// the best strictly. History after the stop epoch is ignored.
EarlyStopResult early_stop_monitor(std::span<const std::pair<int, double>> history,
                                   int patience = 3);

struct FoldPrediction {
  std::string id;
  Stance truth = Stance::kInconclusive;
  Stance pred = Stance::kInconclusive;
};

/// {"id","true","pred"} per line.
void save_fold_predictions(const std::filesystem::path& path,
                           std::span<const FoldPrediction> preds);
std::vector<FoldPrediction> load_fold_predictions(const std::filesystem::path& path);

/// File holding the test-fold predictions of iteration `i` inside a
/// predictions directory.
std::filesystem::path fold_predictions_path(const std::filesystem::path& dir, int iteration);

/// Scores every iteration of `plan` from `dir` and aggregates. Each file
/// may only contain ids of that iteration's test fold.
json evaluate_plan(const FoldPlan& plan, const std::filesystem::path& dir,
                   double confidence = 0.95);

}  // namespace vaxstance
