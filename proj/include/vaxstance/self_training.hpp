// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "vaxstance/scorer.hpp"
#include "vaxstance/stance.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

namespace vaxstance {

using json = nlohmann::ordered_json;

/// Shannon entropy in nats; zero probabilities contribute nothing.
double entropy(const ProbVector& p) noexcept;

/// w_c = (1/N_c) / sum_j (1/N_j). Throws "empty class" when any count is 0.
ClassValues class_weights(const ClassCounts& counts);

/// How raw per-class quotas B * w_c are rounded to integers summing to B.
enum class Apportionment {
  /// Hamilton: floors, then leftover units to the largest remainders (ties
  /// in class order F, A, I). Stays within one unit of each raw quota but is
  /// not monotone in B (the Alabama paradox).
  kLargestRemainder,
  /// Sainte-Lague highest averages on divisors 1, 3, 5, ... (ties in class
  /// order). Monotone in B.
  kSainteLague,
};

struct ClassBudget {
  ClassCounts counts{};  // labeled examples per class
  std::int64_t budget = 0;
  ClassCounts k{};       // pseudo-labels to draw per class; sums to budget
};

/// Splits `budget` across classes proportionally to 1/N_c.
ClassBudget allocate_budget(const ClassCounts& counts, std::int64_t budget,
                            Apportionment method = Apportionment::kLargestRemainder);

struct Prediction {
  std::string comment_id;
  ProbVector probs;
  Stance predicted_class = Stance::kInconclusive;
  double entropy = 0.0;
  bool argmax_tie = false;
};

Prediction make_prediction(std::string comment_id, const ProbVector& probs);
std::vector<Prediction> make_predictions(std::span<const ScoredComment> scores);

struct PseudoLabelBatch {
  /// Per class, ascending by (entropy, comment_id).
  std::array<std::vector<Prediction>, kNumClasses> selected;
  /// Max entropy among retained items of the class; absent when none kept.
  std::array<std::optional<double>, kNumClasses> implied_thresholds;
  ClassCounts requested{};
  ClassCounts pool_sizes{};
  std::array<bool, kNumClasses> shortfall{};

  std::size_t size() const noexcept;
};

/// For every class c keeps the k_c lowest-entropy predictions whose argmax
/// is c, ties broken by comment_id. Takes everything (and flags a
/// shortfall) when a class pool is smaller than k_c.
PseudoLabelBatch select_low_entropy(std::span<const Prediction> predictions,
                                    const ClassBudget& budget);

/// k_c / |pool_c|; absent for an empty class pool.
std::array<std::optional<double>, kNumClasses> retention_fractions(
    const PseudoLabelBatch& batch, std::span<const Prediction> predictions);

/// Share of the whole pool with entropy <= eps_c, per class; the percentile
/// of the empirical entropy distribution that the top-k selection induces.
std::array<std::optional<double>, kNumClasses> induced_percentiles(
    const PseudoLabelBatch& batch, std::span<const Prediction> predictions);

enum class Provenance : std::uint8_t { kManual, kPseudo };
std::string_view to_string(Provenance p) noexcept;

struct LabeledExample {
  std::string comment_id;
  Stance stance = Stance::kInconclusive;
  Provenance provenance = Provenance::kManual;

  bool operator==(const LabeledExample&) const = default;
};

struct LabeledSet {
  std::vector<LabeledExample> examples;

  ClassCounts counts() const noexcept;
  std::size_t size() const noexcept { return examples.size(); }
};

struct MergeResult {
  LabeledSet merged;
  /// 100 * |pseudo| / |labeled|; absent when the labeled set is empty.
  std::optional<double> growth_percent;
};

/// Appends pseudo-labels (tagged kPseudo) to a labeled set. A comment_id
/// present in both inputs is an error naming the id.
MergeResult merge_datasets(const LabeledSet& labeled, const PseudoLabelBatch& pseudo);

/// Writes {"comment_id","stance","probs","entropy","round"} per selected item,
/// classes in order F, A, I.
void save_pseudo_labels(const std::filesystem::path& path, const PseudoLabelBatch& batch,
                        int round);

/// k_c, eps_c, retention fractions, induced percentiles, shortfalls, weights.
json selection_report(const ClassBudget& budget, const PseudoLabelBatch& batch,
                      std::span<const Prediction> predictions, int round);

json to_json(const LabeledSet& set);
void save_labeled_set(const std::filesystem::path& path, const LabeledSet& set);
/// Reads {"comment_id","stance"[,"provenance"]} lines.
LabeledSet load_labeled_set(const std::filesystem::path& path);

}  // namespace vaxstance
