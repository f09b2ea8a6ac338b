// SPDX-License-Identifier: Apache-2.0
#include "vaxstance/self_training.hpp"

#include "vaxstance/error.hpp"
#include "vaxstance/jsonl.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace vaxstance {

namespace {

using i128 = __int128;

void require_positive_counts(const ClassCounts& counts) {
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (counts[c] <= 0) {
      throw validation_error("empty class: " + std::string(to_string(stance_at(c))) +
                             " has count " + std::to_string(counts[c]));
    }
  }
}

// Weight of class c is proportional to the product of the other counts, so
// B * w_c = B * P_c / sum(P). Working on these integers keeps every
// comparison exact.
std::array<i128, kNumClasses> inverse_frequency_numerators(const ClassCounts& counts) {
  std::array<i128, kNumClasses> p{};
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    i128 prod = 1;
    for (std::size_t j = 0; j < kNumClasses; ++j) {
      if (j != c) prod *= counts[j];
    }
    p[c] = prod;
  }
  return p;
}

ClassCounts largest_remainder(const std::array<i128, kNumClasses>& p, std::int64_t budget) {
  i128 denom = 0;
  for (auto v : p) denom += v;
  ClassCounts k{};
  std::array<i128, kNumClasses> rem{};
  std::int64_t assigned = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const i128 num = static_cast<i128>(budget) * p[c];
    k[c] = static_cast<std::int64_t>(num / denom);
    rem[c] = num % denom;
    assigned += k[c];
  }
  std::array<std::size_t, kNumClasses> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
  for (std::int64_t left = budget - assigned, i = 0; left > 0; --left, ++i) {
    ++k[order[static_cast<std::size_t>(i)]];
  }
  return k;
}

ClassCounts sainte_lague(const std::array<i128, kNumClasses>& p, std::int64_t budget) {
  ClassCounts k{};
  for (std::int64_t seat = 0; seat < budget; ++seat) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < kNumClasses; ++c) {
      // p[c] / (2k_c + 1) > p[best] / (2k_best + 1), cross-multiplied.
      if (p[c] * (2 * k[best] + 1) > p[best] * (2 * k[c] + 1)) best = c;
    }
    ++k[best];
  }
  return k;
}

bool entropy_less(const Prediction& a, const Prediction& b) {
  if (a.entropy != b.entropy) return a.entropy < b.entropy;
  return a.comment_id < b.comment_id;
}

}  // namespace

double entropy(const ProbVector& p) noexcept {
  double h = 0.0;
  for (double v : p.p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

ClassValues class_weights(const ClassCounts& counts) {
  require_positive_counts(counts);
  ClassValues w{};
  double total = 0.0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    w[c] = 1.0 / static_cast<double>(counts[c]);
    total += w[c];
  }
  for (double& v : w) v /= total;
  return w;
}

ClassBudget allocate_budget(const ClassCounts& counts, std::int64_t budget,
                            Apportionment method) {
  require_positive_counts(counts);
  if (budget < 0) throw validation_error("budget must be non-negative");
  const auto p = inverse_frequency_numerators(counts);
  ClassBudget out{counts, budget, {}};
  out.k = method == Apportionment::kSainteLague ? sainte_lague(p, budget)
                                                : largest_remainder(p, budget);
  return out;
}

Prediction make_prediction(std::string comment_id, const ProbVector& probs) {
  Prediction pred;
  pred.comment_id = std::move(comment_id);
  pred.probs = probs;
  pred.predicted_class = probs.argmax();
  pred.entropy = entropy(probs);
  pred.argmax_tie = probs.has_argmax_tie();
  if (pred.argmax_tie) {
    spdlog::info("argmax tie for {} resolved to {}", pred.comment_id,
                 to_string(pred.predicted_class));
  }
  return pred;
}

std::vector<Prediction> make_predictions(std::span<const ScoredComment> scores) {
  std::vector<Prediction> out;
  out.reserve(scores.size());
  for (const auto& s : scores) out.push_back(make_prediction(s.comment_id, s.probs));
  return out;
}

std::size_t PseudoLabelBatch::size() const noexcept {
  std::size_t n = 0;
  for (const auto& list : selected) n += list.size();
  return n;
}

PseudoLabelBatch select_low_entropy(std::span<const Prediction> predictions,
                                    const ClassBudget& budget) {
  PseudoLabelBatch batch;
  batch.requested = budget.k;
  std::array<std::vector<const Prediction*>, kNumClasses> pools;
  for (const auto& p : predictions) pools[index(p.predicted_class)].push_back(&p);

  for (std::size_t c = 0; c < kNumClasses; ++c) {
    auto& pool = pools[c];
    batch.pool_sizes[c] = static_cast<std::int64_t>(pool.size());
    const auto want = static_cast<std::size_t>(std::max<std::int64_t>(budget.k[c], 0));
    const std::size_t take = std::min(want, pool.size());
    batch.shortfall[c] = take < want;
    auto less = [](const Prediction* a, const Prediction* b) { return entropy_less(*a, *b); };
    std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take),
                      pool.end(), less);
    auto& out = batch.selected[c];
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) out.push_back(*pool[i]);
    if (!out.empty()) batch.implied_thresholds[c] = out.back().entropy;
    if (batch.shortfall[c]) {
      spdlog::warn("class {}: requested {} pseudo-labels but only {} predicted",
                   to_string(stance_at(c)), want, pool.size());
    }
  }
  return batch;
}

std::array<std::optional<double>, kNumClasses> retention_fractions(
    const PseudoLabelBatch& batch, std::span<const Prediction> predictions) {
  ClassCounts pool{};
  for (const auto& p : predictions) ++pool[index(p.predicted_class)];
  std::array<std::optional<double>, kNumClasses> out;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (pool[c] > 0) {
      out[c] = static_cast<double>(batch.selected[c].size()) / static_cast<double>(pool[c]);
    }
  }
  return out;
}

std::array<std::optional<double>, kNumClasses> induced_percentiles(
    const PseudoLabelBatch& batch, std::span<const Prediction> predictions) {
  std::array<std::optional<double>, kNumClasses> out;
  if (predictions.empty()) return out;
  std::vector<double> sorted;
  sorted.reserve(predictions.size());
  for (const auto& p : predictions) sorted.push_back(p.entropy);
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (!batch.implied_thresholds[c]) continue;
    const auto below = std::upper_bound(sorted.begin(), sorted.end(),
                                        *batch.implied_thresholds[c]) - sorted.begin();
    out[c] = 100.0 * static_cast<double>(below) / static_cast<double>(sorted.size());
  }
  return out;
}

std::string_view to_string(Provenance p) noexcept {
  return p == Provenance::kManual ? "manual" : "pseudo";
}

ClassCounts LabeledSet::counts() const noexcept {
  ClassCounts c{};
  for (const auto& e : examples) ++c[index(e.stance)];
  return c;
}

MergeResult merge_datasets(const LabeledSet& labeled, const PseudoLabelBatch& pseudo) {
  std::unordered_set<std::string> seen;
  seen.reserve(labeled.size() + pseudo.size());
  for (const auto& e : labeled.examples) seen.insert(e.comment_id);

  MergeResult result;
  result.merged = labeled;
  result.merged.examples.reserve(labeled.size() + pseudo.size());
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    for (const auto& p : pseudo.selected[c]) {
      if (!seen.insert(p.comment_id).second) {
        throw validation_error("comment_id appears in both labeled and pseudo-labeled sets: " +
                               p.comment_id);
      }
      result.merged.examples.push_back({p.comment_id, stance_at(c), Provenance::kPseudo});
    }
  }
  if (!labeled.examples.empty()) {
    result.growth_percent = 100.0 * static_cast<double>(pseudo.size()) /
                            static_cast<double>(labeled.size());
  }
  return result;
}

void save_pseudo_labels(const std::filesystem::path& path, const PseudoLabelBatch& batch,
                        int round) {
  std::vector<json> rows;
  rows.reserve(batch.size());
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    for (const auto& p : batch.selected[c]) {
      rows.push_back(json{{"comment_id", p.comment_id},
                          {"stance", to_string(stance_at(c))},
                          {"probs", p.probs.p},
                          {"entropy", p.entropy},
                          {"round", round}});
    }
  }
  write_jsonl(path, rows);
}

namespace {

json optional_number(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

json selection_report(const ClassBudget& budget, const PseudoLabelBatch& batch,
                      std::span<const Prediction> predictions, int round) {
  const auto retention = retention_fractions(batch, predictions);
  const auto percentile = induced_percentiles(batch, predictions);
  const auto weights = class_weights(budget.counts);
  json classes = json::object();
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    classes[std::string(to_string(stance_at(c)))] = json{
        {"labeled_count", budget.counts[c]},
        {"weight", weights[c]},
        {"k", budget.k[c]},
        {"selected", batch.selected[c].size()},
        {"pool_size", batch.pool_sizes[c]},
        {"shortfall", batch.shortfall[c]},
        {"epsilon_nats", optional_number(batch.implied_thresholds[c])},
        {"retention_fraction", optional_number(retention[c])},
        {"induced_percentile", optional_number(percentile[c])},
    };
  }
  return json{{"round", round},
              {"entropy_unit", "nats"},
              {"budget", budget.budget},
              {"predictions", predictions.size()},
              {"selected_total", batch.size()},
              {"classes", classes}};
}

json to_json(const LabeledSet& set) {
  json arr = json::array();
  for (const auto& e : set.examples) {
    arr.push_back(json{{"comment_id", e.comment_id},
                       {"stance", to_string(e.stance)},
                       {"provenance", to_string(e.provenance)}});
  }
  return arr;
}

void save_labeled_set(const std::filesystem::path& path, const LabeledSet& set) {
  const json arr = to_json(set);
  write_jsonl(path, std::vector<json>(arr.begin(), arr.end()));
}

LabeledSet load_labeled_set(const std::filesystem::path& path) {
  LabeledSet set;
  std::unordered_set<std::string> seen;
  for_each_jsonl(path, [&](const json& j, std::size_t) {
    LabeledExample e;
    e.comment_id = j.at("comment_id").get<std::string>();
    e.stance = require_stance(j.at("stance").get<std::string>());
    if (auto it = j.find("provenance"); it != j.end()) {
      const auto prov = it->get<std::string>();
      if (prov == "pseudo") {
        e.provenance = Provenance::kPseudo;
      } else if (prov != "manual") {
        throw validation_error("unknown provenance: " + prov);
      }
    }
    if (!seen.insert(e.comment_id).second) {
      throw validation_error("duplicate comment_id: " + e.comment_id);
    }
    set.examples.push_back(std::move(e));
  });
  return set;
}

}  // namespace vaxstance
