// SPDX-License-Identifier: Apache-2.0
#include "vaxstance/scorer.hpp"

#include "vaxstance/error.hpp"
#include "vaxstance/jsonl.hpp"
#include "vaxstance/text.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace vaxstance {

Stance ProbVector::argmax() const noexcept {
  std::size_t best = 0;
  for (std::size_t i = 1; i < kNumClasses; ++i) {
    if (p[i] > p[best]) best = i;
  }
  return stance_at(best);
}

bool ProbVector::has_argmax_tie() const noexcept {
  const double top = p[index(argmax())];
  return std::count(p.begin(), p.end(), top) > 1;
}

ProbVector validate_probs(std::span<const double> raw, NormalizationMode mode,
                          std::size_t index) {
  const std::string where = "probability vector at index " + std::to_string(index);
  if (raw.size() != kNumClasses) {
    throw validation_error(where + " has " + std::to_string(raw.size()) + " entries, want 3");
  }
  ProbVector out;
  double sum = 0.0;
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    if (!std::isfinite(raw[i]) || raw[i] < 0.0 || raw[i] > 1.0) {
      throw validation_error(where + " has an entry outside [0, 1]");
    }
    out.p[i] = raw[i];
    sum += raw[i];
  }
  if (std::abs(sum - 1.0) > kProbSumTolerance) {
    if (mode == NormalizationMode::kStrict || sum <= 0.0) {
      std::ostringstream msg;
      msg << where << " sums to " << sum << " (tolerance " << kProbSumTolerance << ")";
      throw validation_error(msg.str());
    }
    spdlog::warn("{} sums to {}; renormalizing", where, sum);
    for (double& v : out.p) v /= sum;
  }
  return out;
}

json class_order_json() { return json::array({"FAVORABLE", "AGAINST", "INCONCLUSIVE"}); }

std::array<std::size_t, kNumClasses> parse_class_order(const json& order) {
  if (!order.is_array() || order.size() != kNumClasses) {
    throw validation_error("class_order must list the three stance classes");
  }
  std::array<std::size_t, kNumClasses> mapping{};
  std::set<std::size_t> seen;
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    const auto name = order[k].get<std::string>();
    const auto s = parse_stance(name);
    if (!s || name.size() == 1) throw validation_error("unknown class '" + name + "' in class_order");
    mapping[k] = index(*s);
    seen.insert(mapping[k]);
  }
  if (seen.size() != kNumClasses) throw validation_error("class_order repeats a class");
  return mapping;
}

std::vector<ProbVector> score_batch(std::span<const std::string> texts, const Scorer& scorer,
                                    NormalizationMode mode) {
  if (texts.empty()) return {};
  const auto raw = scorer.score_raw(texts);
  if (raw.size() != texts.size()) {
    throw validation_error("scorer '" + scorer.name() + "' returned " +
                           std::to_string(raw.size()) + " vectors for " +
                           std::to_string(texts.size()) + " texts");
  }
  std::vector<ProbVector> out;
  out.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out.push_back(validate_probs(raw[i], mode, i));
  return out;
}

// ---------------------------------------------------------------------------
// Mock scorer

MockScorer::MockScorer(CueTable cues, double smoothing)
    : cues_(std::move(cues)), smoothing_(smoothing) {
  if (!(smoothing > 0.0 && smoothing < 1.0)) {
    throw validation_error("mock scorer smoothing must lie in (0, 1)");
  }
}

ProbVector MockScorer::score_one(std::string_view text) const {
  std::array<double, kNumClasses> counts{};
  double total = 0.0;
  for (const auto& token : text::tokenize(text)) {
    auto it = cues_.find(token);
    if (it == cues_.end()) continue;
    counts[index(it->second)] += 1.0;
    total += 1.0;
  }
  ProbVector out;
  if (total == 0.0) {
    out.p.fill(1.0 / 3.0);
    return out;
  }
  const double denom = total + static_cast<double>(kNumClasses) * smoothing_;
  for (std::size_t i = 0; i < kNumClasses; ++i) out.p[i] = (counts[i] + smoothing_) / denom;
  return out;
}

std::vector<std::vector<double>> MockScorer::score_raw(std::span<const std::string> texts) const {
  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    const auto pv = score_one(t);
    out.emplace_back(pv.p.begin(), pv.p.end());
  }
  return out;
}

CueTable train_cue_table(std::span<const std::pair<std::string, Stance>> examples,
                         const CueTrainingOptions& options) {
  std::map<std::string, std::array<std::size_t, kNumClasses>> df;
  for (const auto& [text, stance] : examples) {
    auto tokens = text::tokenize(text);
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
    for (const auto& t : tokens) ++df[t][index(stance)];
  }
  CueTable cues;
  for (const auto& [token, counts] : df) {
    std::size_t total = 0;
    std::size_t best = 0;
    for (std::size_t i = 0; i < kNumClasses; ++i) {
      total += counts[i];
      if (counts[i] > counts[best]) best = i;
    }
    if (total < options.min_document_frequency) continue;
    if (static_cast<double>(counts[best]) / static_cast<double>(total) < options.min_purity) continue;
    cues.emplace(token, stance_at(best));
  }
  return cues;
}

json cue_table_to_json(const CueTable& cues) {
  json j = json::object();
  for (const auto& [token, stance] : cues) j[token] = to_string(stance);
  return j;
}

CueTable cue_table_from_json(const json& j) {
  if (!j.is_object()) throw validation_error("cue table must be a JSON object");
  CueTable cues;
  for (const auto& [token, stance] : j.items()) {
    const auto tokens = text::tokenize(token);
    if (tokens.size() != 1) throw validation_error("cue '" + token + "' must be a single word");
    cues[tokens.front()] = require_stance(stance.get<std::string>());
  }
  return cues;
}

// ---------------------------------------------------------------------------
// Remote scorer

HttpScorer::HttpScorer(Options options) : options_(std::move(options)) {
  if (options_.batch_size == 0) throw validation_error("scorer batch size must be positive");
  if (options_.max_in_flight == 0) options_.max_in_flight = 1;
}

namespace {

std::vector<std::vector<double>> decode_score_response(const json& body, std::size_t expected) {
  const auto mapping = parse_class_order(body.at("class_order"));
  const auto& probs = body.at("probs");
  if (!probs.is_array() || probs.size() != expected) {
    throw validation_error("score response has " + std::to_string(probs.size()) +
                           " vectors for " + std::to_string(expected) + " texts");
  }
  std::vector<std::vector<double>> out;
  out.reserve(expected);
  for (const auto& row : probs) {
    if (!row.is_array() || row.size() != kNumClasses) {
      // Let validate_probs produce the indexed error.
      out.push_back(row.get<std::vector<double>>());
      continue;
    }
    std::vector<double> canonical(kNumClasses);
    for (std::size_t k = 0; k < kNumClasses; ++k) canonical[mapping[k]] = row[k].get<double>();
    out.push_back(std::move(canonical));
  }
  return out;
}

}  // namespace

std::vector<std::vector<double>> HttpScorer::score_one_batch(
    std::span<const std::string> texts) const {
  const json request{{"texts", std::vector<std::string>(texts.begin(), texts.end())}};
  const std::string payload = request.dump();
  httplib::Error last_transport_error = httplib::Error::Success;
  auto attempt = [&]() {
    httplib::Client client(options_.base_url);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    auto res = client.Post(options_.path, payload, "application/json");
    if (!res) {
      last_transport_error = res.error();
      throw Error(ErrorKind::kRetryable, "scorer request to " + options_.base_url + " failed: " +
                                             httplib::to_string(res.error()));
    }
    if (res->status >= 500 || res->status == 429) {
      throw Error(ErrorKind::kRetryable, "scorer returned HTTP " + std::to_string(res->status));
    }
    if (res->status != 200) {
      throw validation_error("scorer returned HTTP " + std::to_string(res->status) + ": " +
                             res->body);
    }
    try {
      return decode_score_response(json::parse(res->body), texts.size());
    } catch (const json::exception& e) {
      throw validation_error(std::string("malformed score response: ") + e.what());
    }
  };
  try {
    return options_.retry.run(attempt);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kRetryable) throw;
    if (last_transport_error == httplib::Error::Connection) {
      throw Error(ErrorKind::kUnavailable, std::string("remote scorer unreachable: ") + e.what());
    }
    throw;
  }
}

std::vector<std::vector<double>> HttpScorer::score_raw(std::span<const std::string> texts) const {
  const std::size_t batches = (texts.size() + options_.batch_size - 1) / options_.batch_size;
  std::vector<std::vector<std::vector<double>>> results(batches);
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto worker = [&]() {
    while (true) {
      const std::size_t seq = next.fetch_add(1);
      if (seq >= batches) return;
      {
        std::lock_guard lock(error_mutex);
        if (first_error) return;
      }
      const std::size_t begin = seq * options_.batch_size;
      const std::size_t len = std::min(options_.batch_size, texts.size() - begin);
      try {
        results[seq] = score_one_batch(texts.subspan(begin, len));
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::min(options_.max_in_flight, batches);
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);

  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (auto& batch : results) {
    for (auto& row : batch) out.push_back(std::move(row));
  }
  return out;
}

void mount_score_endpoint(httplib::Server& server, const Scorer& scorer, const std::string& path) {
  server.Post(path, [&scorer](const httplib::Request& req, httplib::Response& res) {
    std::vector<std::string> texts;
    try {
      const auto body = json::parse(req.body);
      texts = body.at("texts").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
      res.status = 400;
      res.set_content(json{{"error", std::string("malformed body: ") + e.what()}}.dump(),
                      "application/json");
      return;
    }
    try {
      const auto probs = score_batch(texts, scorer);
      json rows = json::array();
      for (const auto& pv : probs) rows.push_back(pv.p);
      res.set_content(json{{"probs", rows}, {"class_order", class_order_json()}}.dump(),
                      "application/json");
    } catch (const std::exception& e) {
      res.status = 500;
      res.set_content(json{{"error", e.what()}}.dump(), "application/json");
    }
  });
}

// ---------------------------------------------------------------------------
// scores.jsonl

std::vector<ScoredComment> load_scores(const std::filesystem::path& path, NormalizationMode mode) {
  std::vector<ScoredComment> out;
  std::set<std::string> seen;
  for_each_jsonl(path, [&](const json& row, std::size_t line) {
    ScoredComment sc;
    sc.comment_id = row.at("comment_id").get<std::string>();
    if (!seen.insert(sc.comment_id).second) {
      throw validation_error("duplicate comment_id '" + sc.comment_id + "'");
    }
    auto raw = row.at("probs").get<std::vector<double>>();
    if (auto it = row.find("class_order"); it != row.end()) {
      const auto mapping = parse_class_order(*it);
      if (raw.size() == kNumClasses) {
        std::vector<double> canonical(kNumClasses);
        for (std::size_t k = 0; k < kNumClasses; ++k) canonical[mapping[k]] = raw[k];
        raw = std::move(canonical);
      }
    }
    sc.probs = validate_probs(raw, mode, line - 1);
    out.push_back(std::move(sc));
  });
  return out;
}

void save_scores(const std::filesystem::path& path, std::span<const ScoredComment> scores) {
  std::vector<json> rows;
  rows.reserve(scores.size());
  for (const auto& sc : scores) rows.push_back(json{{"comment_id", sc.comment_id}, {"probs", sc.probs.p}});
  write_jsonl(path, rows);
}

}  // namespace vaxstance
