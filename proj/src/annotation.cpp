// SPDX-License-Identifier: Apache-2.0
#include "vaxstance/annotation.hpp"

#include "vaxstance/error.hpp"
#include "vaxstance/jsonl.hpp"
#include "vaxstance/random.hpp"

#include <algorithm>
#include <fstream>

namespace vaxstance {

namespace fs = std::filesystem;

std::vector<std::string> temporal_sample(std::span<const Comment> comments, int per_month,
                                         std::uint64_t seed, const MonthRange& window) {
  if (per_month < 0) throw validation_error("per_month must be non-negative");
  std::map<YearMonth, std::vector<const Comment*>> by_month;
  for (const auto& c : comments) {
    const auto ym = year_month_of(c.published_at);
    if (window.contains(ym)) by_month[ym].push_back(&c);
  }
  Rng rng(seed);
  std::vector<std::string> out;
  for (auto& [month, pool] : by_month) {
    std::sort(pool.begin(), pool.end(), [](const Comment* a, const Comment* b) {
      if (a->published_at != b->published_at) return a->published_at < b->published_at;
      return a->comment_id < b->comment_id;
    });
    sample_prefix(pool, static_cast<std::size_t>(per_month), rng);
    for (const auto* c : pool) out.push_back(c->comment_id);
  }
  return out;
}

AnnotationRecord resolve(AnnotationRecord record) {
  if (record.labels.size() != 3) {
    throw validation_error("incomplete: comment " + record.comment_id + " has " +
                           std::to_string(record.labels.size()) + " labels, need 3");
  }
  ClassCounts votes{};
  for (const auto& [annotator, stance] : record.labels) ++votes[index(stance)];
  record.resolved.reset();
  record.dropped = false;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (votes[c] >= 2) record.resolved = stance_at(c);
  }
  if (!record.resolved) record.dropped = true;
  return record;
}

AgreementMatrix::AgreementMatrix(std::vector<std::vector<std::int64_t>> rows)
    : rows_(std::move(rows)) {
  if (rows_.empty()) throw validation_error("agreement matrix has no items");
  c_ = rows_.front().size();
  if (c_ == 0) throw validation_error("agreement matrix has no categories");
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const auto& row = rows_[i];
    if (row.size() != c_) {
      throw validation_error("agreement matrix row " + std::to_string(i) + " has " +
                             std::to_string(row.size()) + " categories, expected " +
                             std::to_string(c_));
    }
    std::int64_t sum = 0;
    for (auto v : row) {
      if (v < 0) throw validation_error("negative count in row " + std::to_string(i));
      sum += v;
    }
    if (i == 0) n_ = sum;
    if (sum != n_) {
      throw validation_error("row " + std::to_string(i) + " has " + std::to_string(sum) +
                             " ratings, expected " + std::to_string(n_));
    }
  }
  if (n_ < 2) throw validation_error("need at least 2 raters per item");
}

AgreementMatrix AgreementMatrix::from_records(std::span<const AnnotationRecord> records,
                                              int raters) {
  std::vector<std::vector<std::int64_t>> rows;
  for (const auto& r : records) {
    if (static_cast<int>(r.labels.size()) != raters) continue;
    std::vector<std::int64_t> row(kNumClasses, 0);
    for (const auto& [annotator, stance] : r.labels) ++row[index(stance)];
    rows.push_back(std::move(row));
  }
  return AgreementMatrix(std::move(rows));
}

double fleiss_kappa(const AgreementMatrix& m) {
  const std::size_t items = m.items();
  if (items < 2) throw validation_error("fleiss kappa needs at least 2 items");
  const auto n = m.raters();
  const std::size_t categories = m.categories();

  std::vector<std::int64_t> column(categories, 0);
  double p_bar = 0.0;
  for (const auto& row : m.rows()) {
    std::int64_t sq = 0;
    for (std::size_t j = 0; j < categories; ++j) {
      sq += row[j] * row[j];
      column[j] += row[j];
    }
    p_bar += static_cast<double>(sq - n) / static_cast<double>(n * (n - 1));
  }
  p_bar /= static_cast<double>(items);

  const auto total = static_cast<std::int64_t>(items) * n;
  if (std::any_of(column.begin(), column.end(), [&](auto v) { return v == total; })) {
    throw validation_error("degenerate: chance agreement is 1");
  }
  double p_e = 0.0;
  for (auto v : column) {
    const double pj = static_cast<double>(v) / static_cast<double>(total);
    p_e += pj * pj;
  }
  return (p_bar - p_e) / (1.0 - p_e);
}

LabeledDataset labeled_dataset(std::span<const AnnotationRecord> records) {
  LabeledDataset out;
  out.raw_records = records.size();
  for (const auto& r : records) {
    if (r.dropped) {
      ++out.dropped;
      continue;
    }
    if (!r.resolved) {
      throw validation_error("record " + r.comment_id + " is neither resolved nor dropped");
    }
    out.set.examples.push_back({r.comment_id, *r.resolved, Provenance::kManual});
    ++out.counts[index(*r.resolved)];
  }
  return out;
}

json to_json(const LabelEvent& e) {
  return json{{"comment_id", e.comment_id},
              {"annotator_id", e.annotator_id},
              {"stance", to_string(e.stance)},
              {"timestamp", format_rfc3339(e.at)}};
}

LabelEvent label_event_from_json(const json& j) {
  LabelEvent e;
  e.comment_id = j.at("comment_id").get<std::string>();
  e.annotator_id = j.at("annotator_id").get<std::string>();
  if (e.comment_id.empty() || e.annotator_id.empty()) {
    throw validation_error("comment_id and annotator_id must be non-empty");
  }
  e.stance = require_stance(j.at("stance").get<std::string>());
  if (auto it = j.find("timestamp"); it != j.end() && !it->is_null()) {
    e.at = parse_rfc3339(it->get<std::string>());
  }
  return e;
}

AnnotationLog::AnnotationLog(fs::path path) {
  if (fs::exists(path)) {
    for_each_jsonl(path, [&](const json& j, std::size_t) { insert_locked(label_event_from_json(j)); });
  }
  path_ = std::move(path);
}

void AnnotationLog::insert_locked(const LabelEvent& event) {
  auto& labels = by_comment_[event.comment_id];
  if (!labels.emplace(event.annotator_id, event.stance).second) {
    throw Error(ErrorKind::kConflict, "annotator " + event.annotator_id +
                                          " already labeled comment " + event.comment_id);
  }
  events_.push_back(event);
}

void AnnotationLog::append(const LabelEvent& event, std::size_t max_labels) {
  std::lock_guard lock(mu_);
  if (auto it = by_comment_.find(event.comment_id);
      it != by_comment_.end() && it->second.size() >= max_labels &&
      !it->second.contains(event.annotator_id)) {
    throw Error(ErrorKind::kConflict, "comment " + event.comment_id + " already has " +
                                          std::to_string(max_labels) + " labels");
  }
  insert_locked(event);
  if (path_) {
    if (path_->has_parent_path()) fs::create_directories(path_->parent_path());
    std::ofstream out(*path_, std::ios::binary | std::ios::app);
    out << to_json(event).dump() << '\n';
    if (!out) throw Error(ErrorKind::kGeneric, "cannot append to " + path_->string());
  }
}

std::vector<LabelEvent> AnnotationLog::events() const {
  std::lock_guard lock(mu_);
  return events_;
}

std::size_t AnnotationLog::size() const {
  std::lock_guard lock(mu_);
  return events_.size();
}

std::size_t AnnotationLog::label_count(const std::string& comment_id) const {
  std::lock_guard lock(mu_);
  auto it = by_comment_.find(comment_id);
  return it == by_comment_.end() ? 0 : it->second.size();
}

bool AnnotationLog::has_label(const std::string& comment_id,
                              const std::string& annotator_id) const {
  std::lock_guard lock(mu_);
  auto it = by_comment_.find(comment_id);
  return it != by_comment_.end() && it->second.contains(annotator_id);
}

std::vector<AnnotationRecord> AnnotationLog::records() const {
  std::lock_guard lock(mu_);
  std::vector<AnnotationRecord> out;
  std::unordered_map<std::string, std::size_t> pos;
  for (const auto& e : events_) {
    auto [it, inserted] = pos.emplace(e.comment_id, out.size());
    if (inserted) out.push_back({e.comment_id, {}, std::nullopt, false});
    out[it->second].labels[e.annotator_id] = e.stance;
  }
  return out;
}

AgreementSummary summarize_agreement(const AnnotationLog& log, int raters) {
  AgreementSummary s;
  const auto records = log.records();
  s.labels = log.size();
  s.items_labeled = records.size();
  std::vector<AnnotationRecord> complete;
  for (const auto& r : records) {
    if (static_cast<int>(r.labels.size()) != raters) continue;
    complete.push_back(raters == 3 ? resolve(r) : r);
  }
  s.items_complete = complete.size();
  for (const auto& r : complete) {
    if (r.dropped) ++s.dropped;
    if (r.resolved) {
      ++s.resolved;
      ++s.resolved_counts[index(*r.resolved)];
    }
  }
  if (complete.size() < 2) {
    s.kappa_note = "fewer than 2 fully labeled items";
    return s;
  }
  try {
    s.kappa = fleiss_kappa(AgreementMatrix::from_records(complete, raters));
  } catch (const Error& e) {
    s.kappa_note = e.what();
  }
  return s;
}

json to_json(const AgreementSummary& s) {
  json counts = json::object();
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    counts[std::string(to_string(stance_at(c)))] = s.resolved_counts[c];
  }
  json j{{"labels", s.labels},
         {"items_labeled", s.items_labeled},
         {"items_complete", s.items_complete},
         {"resolved", s.resolved},
         {"dropped", s.dropped},
         {"resolved_counts", counts},
         {"kappa", s.kappa ? json(*s.kappa) : json(nullptr)}};
  if (!s.kappa_note.empty()) j["kappa_note"] = s.kappa_note;
  return j;
}

json to_json(const ReviewDecision& d) {
  json j{{"comment_id", d.comment_id},
         {"verdict", d.verdict == ReviewVerdict::kAccept ? "accept" : "override"}};
  if (d.corrected) j["stance"] = to_string(*d.corrected);
  if (!d.reviewer.empty()) j["reviewer"] = d.reviewer;
  j["timestamp"] = format_rfc3339(d.at);
  return j;
}

ReviewDecision review_decision_from_json(const json& j) {
  ReviewDecision d;
  d.comment_id = j.at("comment_id").get<std::string>();
  const auto verdict = j.at("verdict").get<std::string>();
  if (verdict == "accept") {
    d.verdict = ReviewVerdict::kAccept;
  } else if (verdict == "override") {
    d.verdict = ReviewVerdict::kOverride;
  } else {
    throw validation_error("verdict must be accept or override, got " + verdict);
  }
  if (auto it = j.find("stance"); it != j.end() && !it->is_null()) {
    d.corrected = require_stance(it->get<std::string>());
  }
  if (d.verdict == ReviewVerdict::kOverride && !d.corrected) {
    throw validation_error("override decision for " + d.comment_id + " needs a stance");
  }
  if (auto it = j.find("reviewer"); it != j.end() && it->is_string()) {
    d.reviewer = it->get<std::string>();
  }
  if (auto it = j.find("timestamp"); it != j.end() && it->is_string()) {
    d.at = parse_rfc3339(it->get<std::string>());
  }
  return d;
}

ReviewQueue::ReviewQueue(std::vector<ReviewItem> items,
                         std::optional<fs::path> decisions_path)
    : items_(std::move(items)), path_(std::move(decisions_path)) {
  std::stable_sort(items_.begin(), items_.end(), [](const ReviewItem& a, const ReviewItem& b) {
    if (a.stance != b.stance) return a.stance < b.stance;
    if (a.entropy != b.entropy) return a.entropy < b.entropy;
    return a.comment_id < b.comment_id;
  });
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (!index_.emplace(items_[i].comment_id, i).second) {
      throw validation_error("duplicate review item " + items_[i].comment_id);
    }
  }
  if (path_) {
    for (auto& d : load_review_decisions(*path_)) {
      if (decided_.contains(d.comment_id)) continue;
      order_.push_back(d);
      decided_.emplace(d.comment_id, std::move(d));
    }
  }
}

std::vector<ReviewItem> ReviewQueue::pending(std::size_t limit) const {
  std::lock_guard lock(mu_);
  std::vector<ReviewItem> out;
  for (const auto& item : items_) {
    if (out.size() >= limit) break;
    if (!decided_.contains(item.comment_id)) out.push_back(item);
  }
  return out;
}

void ReviewQueue::decide(const ReviewDecision& decision) {
  std::lock_guard lock(mu_);
  if (!index_.contains(decision.comment_id)) {
    throw missing_input("no review item " + decision.comment_id);
  }
  if (decided_.contains(decision.comment_id)) {
    throw Error(ErrorKind::kConflict, "item " + decision.comment_id + " already adjudicated");
  }
  if (decision.verdict == ReviewVerdict::kOverride && !decision.corrected) {
    throw validation_error("override decision needs a stance");
  }
  if (path_) {
    if (path_->has_parent_path()) fs::create_directories(path_->parent_path());
    std::ofstream out(*path_, std::ios::binary | std::ios::app);
    out << to_json(decision).dump() << '\n';
    if (!out) throw Error(ErrorKind::kGeneric, "cannot append to " + path_->string());
  }
  decided_.emplace(decision.comment_id, decision);
  order_.push_back(decision);
}

std::vector<ReviewDecision> ReviewQueue::decisions() const {
  std::lock_guard lock(mu_);
  return order_;
}

std::size_t ReviewQueue::size() const {
  std::lock_guard lock(mu_);
  return items_.size();
}

std::vector<ReviewDecision> load_review_decisions(const fs::path& path) {
  std::vector<ReviewDecision> out;
  if (!fs::exists(path)) return out;
  for_each_jsonl(path, [&](const json& j, std::size_t) {
    out.push_back(review_decision_from_json(j));
  });
  return out;
}

std::vector<std::string> exclusion_list(std::span<const ReviewDecision> decisions) {
  std::vector<std::string> ids;
  ids.reserve(decisions.size());
  for (const auto& d : decisions) ids.push_back(d.comment_id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

}  // namespace vaxstance
