// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "vaxstance/corpus.hpp"
#include "vaxstance/self_training.hpp"
#include "vaxstance/stance.hpp"
#include "vaxstance/timeutil.hpp"

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace vaxstance {

/// Up to `per_month` comment ids drawn uniformly without replacement from
/// each calendar month of `window`, months in ascending order. Candidates
/// are ordered by (published_at, comment_id) before drawing so the result
/// depends only on the seed and the set of comments, not their input order.
std::vector<std::string> temporal_sample(std::span<const Comment> comments, int per_month,
                                         std::uint64_t seed,
                                         const MonthRange& window = kDefaultWindow);

struct AnnotationRecord {
  std::string comment_id;
  std::map<std::string, Stance> labels;  // annotator_id -> stance
  std::optional<Stance> resolved;
  bool dropped = false;
};

/// Majority vote over exactly three labels. Throws "incomplete" otherwise.
AnnotationRecord resolve(AnnotationRecord record);

/// Per-item category counts for Fleiss' kappa.
class AgreementMatrix {
 public:
  /// Validates: at least one row, every row has the same number of
  /// categories and the same total n >= 2, all cells non-negative.
  explicit AgreementMatrix(std::vector<std::vector<std::int64_t>> rows);

  /// One row per record with exactly `raters` labels, columns in class order.
  static AgreementMatrix from_records(std::span<const AnnotationRecord> records, int raters);

  const std::vector<std::vector<std::int64_t>>& rows() const noexcept { return rows_; }
  std::int64_t raters() const noexcept { return n_; }
  std::size_t categories() const noexcept { return c_; }
  std::size_t items() const noexcept { return rows_.size(); }

 private:
  std::vector<std::vector<std::int64_t>> rows_;
  std::int64_t n_ = 0;
  std::size_t c_ = 0;
};

/// Fleiss' kappa. Needs >= 2 items; throws "degenerate: chance agreement is
/// 1" when every rating falls in one category.
double fleiss_kappa(const AgreementMatrix& m);

struct LabeledDataset {
  LabeledSet set;
  ClassCounts counts{};
  std::size_t raw_records = 0;
  std::size_t dropped = 0;
};

/// Resolved records become manual examples; dropped ones are excluded.
/// Throws if a record is neither resolved nor dropped.
LabeledDataset labeled_dataset(std::span<const AnnotationRecord> records);

struct LabelEvent {
  std::string comment_id;
  std::string annotator_id;
  Stance stance = Stance::kInconclusive;
  Timestamp at{};
};

/// Append-only store of individual labels, optionally mirrored to a JSONL
/// file. Thread-safe. A second label from the same annotator for the same
/// comment is rejected with ErrorKind::kConflict.
class AnnotationLog {
 public:
  AnnotationLog() = default;
  /// Replays `path` if it exists and appends every later event to it.
  explicit AnnotationLog(std::filesystem::path path);

  /// `max_labels` caps how many annotators may label one comment; the check
  /// and the append happen under one lock.
  void append(const LabelEvent& event,
              std::size_t max_labels = std::numeric_limits<std::size_t>::max());
  std::vector<LabelEvent> events() const;
  std::size_t size() const;
  /// Number of labels recorded for the comment.
  std::size_t label_count(const std::string& comment_id) const;
  bool has_label(const std::string& comment_id, const std::string& annotator_id) const;
  /// One record per labeled comment in first-label order, unresolved.
  std::vector<AnnotationRecord> records() const;

 private:
  void insert_locked(const LabelEvent& event);

  mutable std::mutex mu_;
  std::optional<std::filesystem::path> path_;
  std::vector<LabelEvent> events_;
  std::unordered_map<std::string, std::map<std::string, Stance>> by_comment_;
};

json to_json(const LabelEvent& e);
LabelEvent label_event_from_json(const json& j);

/// Agreement snapshot over items that have exactly `raters` labels.
struct AgreementSummary {
  std::size_t labels = 0;            // individual labels in the log
  std::size_t items_labeled = 0;     // comments with >= 1 label
  std::size_t items_complete = 0;    // comments with exactly `raters` labels
  std::size_t resolved = 0;
  std::size_t dropped = 0;
  ClassCounts resolved_counts{};
  std::optional<double> kappa;       // absent with < 2 complete items or degenerate
  std::string kappa_note;
};

AgreementSummary summarize_agreement(const AnnotationLog& log, int raters);
json to_json(const AgreementSummary& s);

enum class ReviewVerdict : std::uint8_t { kAccept, kOverride };

struct ReviewItem {
  std::string comment_id;
  std::string text;
  Stance stance = Stance::kInconclusive;
  double entropy = 0.0;
};

struct ReviewDecision {
  std::string comment_id;
  ReviewVerdict verdict = ReviewVerdict::kAccept;
  std::optional<Stance> corrected;  // required for overrides
  std::string reviewer;
  Timestamp at{};
};

json to_json(const ReviewDecision& d);
ReviewDecision review_decision_from_json(const json& j);

/// Pseudo-labels awaiting human adjudication. Pending items are served per
/// class in order F, A, I, lowest entropy first, ties by comment_id. Each
/// item can be decided once; a repeat is ErrorKind::kConflict.
class ReviewQueue {
 public:
  ReviewQueue() = default;
  ReviewQueue(std::vector<ReviewItem> items, std::optional<std::filesystem::path> decisions_path);

  std::vector<ReviewItem> pending(std::size_t limit) const;
  void decide(const ReviewDecision& decision);
  std::vector<ReviewDecision> decisions() const;
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::vector<ReviewItem> items_;
  std::unordered_map<std::string, std::size_t> index_;
  std::map<std::string, ReviewDecision> decided_;
  std::vector<ReviewDecision> order_;
  std::optional<std::filesystem::path> path_;
};

/// Reads review decisions written by ReviewQueue. A missing file yields none.
std::vector<ReviewDecision> load_review_decisions(const std::filesystem::path& path);

/// Ids of every adjudicated item; the next self-training round skips them.
std::vector<std::string> exclusion_list(std::span<const ReviewDecision> decisions);

}  // namespace vaxstance
