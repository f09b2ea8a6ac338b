// SPDX-License-Identifier: Apache-2.0
#include "vaxstance/evaluation.hpp"

#include "vaxstance/error.hpp"
#include "vaxstance/jsonl.hpp"
#include "vaxstance/random.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

namespace vaxstance {

namespace fs = std::filesystem;

std::vector<std::string> FoldPlan::fold_members(int fold) const {
  std::vector<std::string> out;
  for (const auto& [id, f] : assignments) {
    if (f == fold) out.push_back(id);
  }
  return out;
}

namespace {

std::vector<FoldRoles> rotation_for(int k) {
  std::vector<FoldRoles> rot;
  for (int i = 0; i < k; ++i) {
    FoldRoles r;
    r.validation = i;
    r.test = (i + 1) % k;
    for (int f = 0; f < k; ++f) {
      if (f != r.validation && f != r.test) r.train.push_back(f);
    }
    rot.push_back(std::move(r));
  }
  return rot;
}

}  // namespace

FoldPlan make_fold_plan(std::span<const std::pair<std::string, Stance>> labels, int k,
                        std::uint64_t seed) {
  if (k < 3) throw validation_error("need at least 3 folds (train, validation, test)");
  std::array<std::vector<std::size_t>, kNumClasses> by_class;
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!seen.insert(labels[i].first).second) {
      throw validation_error("duplicate example id " + labels[i].first);
    }
    by_class[index(labels[i].second)].push_back(i);
  }
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const auto n = by_class[c].size();
    if (n > 0 && n < static_cast<std::size_t>(k)) {
      throw validation_error("class " + std::string(to_string(stance_at(c))) + " has " +
                             std::to_string(n) + " examples, fewer than " +
                             std::to_string(k) + " folds");
    }
  }

  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.rotation = rotation_for(k);
  std::vector<int> fold_of(labels.size(), 0);
  Rng rng(seed);
  std::size_t offset = 0;
  for (auto& members : by_class) {
    std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      return labels[a].first < labels[b].first;
    });
    sample_prefix(members, members.size(), rng);  // full seeded shuffle
    for (std::size_t j = 0; j < members.size(); ++j) {
      fold_of[members[j]] = static_cast<int>((offset + j) % static_cast<std::size_t>(k));
    }
    offset = (offset + members.size()) % static_cast<std::size_t>(k);
  }
  plan.assignments.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    plan.assignments.emplace_back(labels[i].first, fold_of[i]);
  }
  return plan;
}

json to_json(const FoldPlan& plan) {
  json assignments = json::array();
  for (const auto& [id, fold] : plan.assignments) {
    assignments.push_back(json{{"id", id}, {"fold", fold}});
  }
  json rotation = json::array();
  for (std::size_t i = 0; i < plan.rotation.size(); ++i) {
    const auto& r = plan.rotation[i];
    rotation.push_back(json{{"iteration", i},
                            {"train", r.train},
                            {"validation", r.validation},
                            {"test", r.test}});
  }
  return json{{"k", plan.k},
              {"seed", plan.seed},
              {"rotation", rotation},
              {"assignments", assignments}};
}

FoldPlan fold_plan_from_json(const json& j) {
  FoldPlan plan;
  plan.k = j.at("k").get<int>();
  if (plan.k < 3) throw validation_error("fold plan k must be >= 3");
  plan.seed = j.at("seed").get<std::uint64_t>();
  plan.rotation = rotation_for(plan.k);
  std::unordered_set<std::string> seen;
  for (const auto& a : j.at("assignments")) {
    auto id = a.at("id").get<std::string>();
    const int fold = a.at("fold").get<int>();
    if (fold < 0 || fold >= plan.k) throw validation_error("fold out of range for " + id);
    if (!seen.insert(id).second) throw validation_error("duplicate id in plan: " + id);
    plan.assignments.emplace_back(std::move(id), fold);
  }
  return plan;
}

MetricReport compute_metrics(std::span<const Stance> y_true, std::span<const Stance> y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw validation_error("length mismatch: " + std::to_string(y_true.size()) + " truths vs " +
                           std::to_string(y_pred.size()) + " predictions");
  }
  if (y_true.empty()) throw validation_error("cannot score an empty prediction set");

  std::array<std::array<std::int64_t, kNumClasses>, kNumClasses> confusion{};
  for (std::size_t i = 0; i < y_true.size(); ++i) ++confusion[index(y_true[i])][index(y_pred[i])];

  MetricReport r;
  r.n = y_true.size();
  std::int64_t correct = 0;
  double f1_sum = 0.0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    auto& m = r.per_class[c];
    const std::int64_t tp = confusion[c][c];
    for (std::size_t j = 0; j < kNumClasses; ++j) {
      m.support += confusion[c][j];
      m.predicted += confusion[j][c];
    }
    correct += tp;
    m.precision_undefined = m.predicted == 0;
    m.recall_undefined = m.support == 0;
    m.absent = m.precision_undefined && m.recall_undefined;
    m.precision = m.predicted ? static_cast<double>(tp) / static_cast<double>(m.predicted) : 0.0;
    m.recall = m.support ? static_cast<double>(tp) / static_cast<double>(m.support) : 0.0;
    const double denom = m.precision + m.recall;
    m.f1 = denom > 0.0 ? 2.0 * m.precision * m.recall / denom : 0.0;
    f1_sum += m.f1;
  }
  r.macro_f1 = f1_sum / static_cast<double>(kNumClasses);
  r.accuracy = static_cast<double>(correct) / static_cast<double>(r.n);
  return r;
}

json to_json(const MetricReport& r) {
  json classes = json::object();
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const auto& m = r.per_class[c];
    json entry{{"precision", m.precision},
               {"recall", m.recall},
               {"f1", m.f1},
               {"support", m.support},
               {"predicted", m.predicted}};
    json flags = json::array();
    if (m.precision_undefined) flags.push_back("precision_undefined");
    if (m.recall_undefined) flags.push_back("recall_undefined");
    if (m.absent) flags.push_back("absent");
    if (!flags.empty()) entry["flags"] = flags;
    classes[std::string(to_string(stance_at(c)))] = entry;
  }
  return json{{"n", r.n}, {"accuracy", r.accuracy}, {"macro_f1", r.macro_f1}, {"classes", classes}};
}

std::vector<std::string> metric_names() {
  std::vector<std::string> names{"accuracy", "macro_f1"};
  for (auto s : kAllStances) {
    for (const char* m : {"precision", "recall", "f1"}) {
      names.push_back(std::string(to_string(s)) + "." + m);
    }
  }
  return names;
}

double metric_value(const MetricReport& r, const std::string& name) {
  if (name == "accuracy") return r.accuracy;
  if (name == "macro_f1") return r.macro_f1;
  const auto dot = name.find('.');
  if (dot != std::string::npos) {
    if (auto s = parse_stance(name.substr(0, dot))) {
      const auto& m = r.per_class[index(*s)];
      const auto field = name.substr(dot + 1);
      if (field == "precision") return m.precision;
      if (field == "recall") return m.recall;
      if (field == "f1") return m.f1;
    }
  }
  throw validation_error("unknown metric " + name);
}

IntervalEstimate t_interval(std::span<const double> values, double confidence) {
  if (values.size() < 2) throw validation_error("need at least 2 values for an interval");
  if (!(confidence > 0.0 && confidence < 1.0)) throw validation_error("confidence must be in (0,1)");
  IntervalEstimate e;
  e.values.assign(values.begin(), values.end());
  std::vector<double> sorted = e.values;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double sum = 0.0;
  for (double v : sorted) sum += v;
  // A constant series has no spread; averaging could still leave rounding noise.
  e.mean = sorted.front() == sorted.back() ? sorted.front() : sum / n;
  std::vector<double> sq;
  sq.reserve(sorted.size());
  for (double v : sorted) sq.push_back((v - e.mean) * (v - e.mean));
  std::sort(sq.begin(), sq.end());
  double ss = 0.0;
  for (double v : sq) ss += v;
  e.stddev = std::sqrt(ss / (n - 1.0));
  const boost::math::students_t dist(n - 1.0);
  const double t = boost::math::quantile(dist, 1.0 - (1.0 - confidence) / 2.0);
  e.half_width = t * e.stddev / std::sqrt(n);
  return e;
}

const IntervalEstimate& AggregateReport::at(const std::string& name) const {
  for (const auto& [key, value] : metrics) {
    if (key == name) return value;
  }
  throw validation_error("unknown metric " + name);
}

AggregateReport aggregate_folds(std::span<const MetricReport> reports, double confidence) {
  if (reports.size() < 2) throw validation_error("need at least 2 fold reports");
  AggregateReport agg;
  agg.folds = reports.size();
  agg.confidence = confidence;
  for (const auto& name : metric_names()) {
    std::vector<double> values;
    values.reserve(reports.size());
    for (const auto& r : reports) values.push_back(metric_value(r, name));
    agg.metrics.emplace_back(name, t_interval(values, confidence));
  }
  return agg;
}

json to_json(const AggregateReport& r) {
  json metrics = json::object();
  for (const auto& [name, e] : r.metrics) {
    metrics[name] = json{{"mean", e.mean},
                         {"std", e.stddev},
                         {"ci_half_width", e.half_width},
                         {"ci_low", e.mean - e.half_width},
                         {"ci_high", e.mean + e.half_width},
                         {"values", e.values}};
  }
  return json{{"folds", r.folds},
              {"ci_method", "student-t"},
              {"df", r.folds - 1},
              {"confidence", r.confidence},
              {"metrics", metrics}};
}

EarlyStopResult early_stop_monitor(std::span<const std::pair<int, double>> history,
                                   int patience) {
  if (history.empty()) throw validation_error("early stopping needs a non-empty history");
  if (patience < 1) throw validation_error("patience must be >= 1");
  EarlyStopResult r;
  r.best_epoch = history.front().first;
  r.best_value = history.front().second;
  int stale = 0;
  for (std::size_t i = 1; i < history.size(); ++i) {
    const auto& [epoch, value] = history[i];
    if (value > r.best_value) {
      r.best_value = value;
      r.best_epoch = epoch;
      stale = 0;
    } else if (++stale >= patience) {
      r.stop_epoch = epoch;
      break;
    }
  }
  return r;
}

void save_fold_predictions(const fs::path& path, std::span<const FoldPrediction> preds) {
  std::vector<json> rows;
  rows.reserve(preds.size());
  for (const auto& p : preds) {
    rows.push_back(json{{"id", p.id}, {"true", to_string(p.truth)}, {"pred", to_string(p.pred)}});
  }
  write_jsonl(path, rows);
}

std::vector<FoldPrediction> load_fold_predictions(const fs::path& path) {
  std::vector<FoldPrediction> out;
  for_each_jsonl(path, [&](const json& j, std::size_t) {
    out.push_back({j.at("id").get<std::string>(), require_stance(j.at("true").get<std::string>()),
                   require_stance(j.at("pred").get<std::string>())});
  });
  return out;
}

fs::path fold_predictions_path(const fs::path& dir, int iteration) {
  return dir / ("fold_" + std::to_string(iteration) + ".jsonl");
}

json evaluate_plan(const FoldPlan& plan, const fs::path& dir, double confidence) {
  std::unordered_map<std::string, int> fold_of;
  for (const auto& [id, fold] : plan.assignments) fold_of.emplace(id, fold);

  std::vector<MetricReport> reports;
  json folds = json::array();
  for (int i = 0; i < plan.k; ++i) {
    const auto& roles = plan.rotation[static_cast<std::size_t>(i)];
    const auto path = fold_predictions_path(dir, i);
    const auto preds = load_fold_predictions(path);
    std::vector<Stance> truth, pred;
    std::unordered_set<std::string> seen;
    for (const auto& p : preds) {
      auto it = fold_of.find(p.id);
      if (it == fold_of.end() || it->second != roles.test) {
        throw validation_error(path.string() + ": id " + p.id + " is not in test fold " +
                               std::to_string(roles.test));
      }
      if (!seen.insert(p.id).second) {
        throw validation_error(path.string() + ": duplicate id " + p.id);
      }
      truth.push_back(p.truth);
      pred.push_back(p.pred);
    }
    const auto expected = plan.fold_members(roles.test).size();
    if (seen.size() != expected) {
      spdlog::warn("{}: {} of {} test-fold examples have predictions", path.string(),
                   seen.size(), expected);
    }
    reports.push_back(compute_metrics(truth, pred));
    folds.push_back(json{{"iteration", i},
                         {"validation_fold", roles.validation},
                         {"test_fold", roles.test},
                         {"report", to_json(reports.back())}});
  }
  return json{{"k", plan.k},
              {"per_fold", folds},
              {"aggregate", to_json(aggregate_folds(reports, confidence))}};
}

}  // namespace vaxstance
