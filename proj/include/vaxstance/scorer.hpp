// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "vaxstance/retry.hpp"
#include "vaxstance/stance.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <chrono>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace httplib {
class Server;
}

namespace vaxstance {

using json = nlohmann::ordered_json;

/// Tolerance on |sum(p) - 1|.
inline constexpr double kProbSumTolerance = 1e-6;

/// Probability distribution over (FAVORABLE, AGAINST, INCONCLUSIVE).
struct ProbVector {
  std::array<double, kNumClasses> p{};

  double operator[](std::size_t i) const noexcept { return p[i]; }
  double operator[](Stance s) const noexcept { return p[index(s)]; }

  /// Highest-probability class; exact ties resolve in class order F, A, I.
  Stance argmax() const noexcept;
  /// True when the maximum is shared by more than one class.
  bool has_argmax_tie() const noexcept;

  bool operator==(const ProbVector&) const = default;
};

enum class NormalizationMode {
  kStrict,       // out-of-tolerance sums are errors
  kRenormalize,  // rescale and warn
};

/// Checks length, range and sum. `index` is used only in error messages.
ProbVector validate_probs(std::span<const double> raw, NormalizationMode mode,
                          std::size_t index);

/// Canonical wire names, in class order.
json class_order_json();

/// Maps a wire class_order onto canonical positions: result[k] is the
/// canonical index of wire column k. Throws unless it is a permutation of
/// the three class names.
std::array<std::size_t, kNumClasses> parse_class_order(const json& order);

/// Anything that maps texts to per-class probabilities. Implementations
/// return rows in canonical class order; validation is the gateway's job.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual std::vector<std::vector<double>> score_raw(std::span<const std::string> texts) const = 0;
  virtual std::string name() const = 0;
};

/// One validated vector per input, same order. A vector outside tolerance
/// fails with an error naming its index.
std::vector<ProbVector> score_batch(std::span<const std::string> texts, const Scorer& scorer,
                                    NormalizationMode mode = NormalizationMode::kStrict);

/// Folded token -> class it signals.
using CueTable = std::map<std::string, Stance>;

/// Deterministic test double for a trained classifier.
///
/// Counts cue tokens per class (c_F, c_A, c_I; total T) and emits
///   p_k = (c_k + s) / (T + 3 s)
/// with smoothing s in (0, 1). A text without cues gets the uniform vector.
class MockScorer final : public Scorer {
 public:
  MockScorer(CueTable cues, double smoothing);

  std::vector<std::vector<double>> score_raw(std::span<const std::string> texts) const override;
  std::string name() const override { return "mock"; }

  ProbVector score_one(std::string_view text) const;
  const CueTable& cues() const noexcept { return cues_; }
  double smoothing() const noexcept { return smoothing_; }

 private:
  CueTable cues_;
  double smoothing_;
};

struct CueTrainingOptions {
  /// Minimum number of training texts containing the token.
  std::size_t min_document_frequency = 2;
  /// Minimum share of those texts carrying the token's majority class.
  double min_purity = 0.95;
};

/// Learns a cue table from labeled texts: a token becomes a cue for class c
/// when it is frequent enough and (nearly) exclusive to c. This is the
/// in-process "trainer" behind the mock pipeline.
CueTable train_cue_table(std::span<const std::pair<std::string, Stance>> examples,
                         const CueTrainingOptions& options = {});

json cue_table_to_json(const CueTable& cues);
CueTable cue_table_from_json(const json& j);

/// Client for the remote scoring protocol:
///   POST {path}  {"texts": [...]}  ->  {"probs": [[f,a,i], ...], "class_order": [...]}
/// Splits inputs into batches and keeps up to `max_in_flight` requests open;
/// responses are reassembled by batch sequence number.
class HttpScorer final : public Scorer {
 public:
  struct Options {
    std::string base_url = "http://127.0.0.1:8080";
    std::string path = "/score";
    std::size_t batch_size = 128;
    std::size_t max_in_flight = 4;
    std::chrono::milliseconds timeout{30000};
    RetryPolicy retry;
  };

  explicit HttpScorer(Options options);

  std::vector<std::vector<double>> score_raw(std::span<const std::string> texts) const override;
  std::string name() const override { return "http:" + options_.base_url + options_.path; }

 private:
  std::vector<std::vector<double>> score_one_batch(std::span<const std::string> texts) const;
  Options options_;
};

/// Registers POST `path` on `server`, answering with `scorer`'s output in
/// the wire format above. Malformed bodies get 400.
void mount_score_endpoint(httplib::Server& server, const Scorer& scorer, const std::string& path);

/// One line of scores.jsonl.
struct ScoredComment {
  std::string comment_id;
  ProbVector probs;
};

/// Reads {"comment_id", "probs"[, "class_order"]} lines.
std::vector<ScoredComment> load_scores(const std::filesystem::path& path,
                                       NormalizationMode mode = NormalizationMode::kStrict);
void save_scores(const std::filesystem::path& path, std::span<const ScoredComment> scores);

}  // namespace vaxstance
