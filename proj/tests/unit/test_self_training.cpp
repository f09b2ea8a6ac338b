// SPDX-License-Identifier: Apache-2.0
#include "../support/fixtures.hpp"
#include "../support/oracles.hpp"

#include "vaxstance/jsonl.hpp"
#include "vaxstance/random.hpp"
#include "vaxstance/self_training.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace vaxstance;

namespace {

ProbVector pv(double f, double a, double i) {
  ProbVector p;
  p.p = {f, a, i};
  return p;
}

std::vector<std::int64_t> as_vec(const ClassCounts& c) { return {c[0], c[1], c[2]}; }

}  // namespace

TEST_SUITE("self_training") {

TEST_CASE("entropy in nats") {
  CHECK(entropy(pv(1, 0, 0)) == 0.0);
  CHECK(entropy(pv(1.0 / 3, 1.0 / 3, 1.0 / 3)) == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  const double want = static_cast<double>(oracle::entropy({0.9995L, 0.0004L, 0.0001L}));
  CHECK(entropy(pv(0.9995, 0.0004, 0.0001)) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("entropy bounds, maximum at uniform, permutation invariance") {
  Rng rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 2000; ++t) {
    double a = u(rng), b = u(rng), c = u(rng);
    const double s = a + b + c;
    a /= s, b /= s, c /= s;
    const double h = entropy(pv(a, b, c));
    CHECK(h >= 0.0);
    CHECK(h <= std::log(3.0) + 1e-12);
    CHECK(entropy(pv(c, a, b)) == doctest::Approx(h).epsilon(1e-12));
    CHECK(entropy(pv(b, c, a)) == doctest::Approx(h).epsilon(1e-12));
  }
}

TEST_CASE("class weights") {
  auto w = class_weights({10, 10, 10});
  for (double x : w) CHECK(x == doctest::Approx(1.0 / 3));
  w = class_weights({1, 1, 2});
  CHECK(w[0] == doctest::Approx(0.4));
  CHECK(w[1] == doctest::Approx(0.4));
  CHECK(w[2] == doctest::Approx(0.2));
  w = class_weights({295, 446, 2735});
  const auto o = oracle::inverse_frequency({295, 446, 2735});
  for (std::size_t c = 0; c < 3; ++c) CHECK(w[c] == doctest::Approx(static_cast<double>(o[c])).epsilon(1e-12));
  CHECK_THROWS_AS(class_weights({0, 3, 4}), Error);
}

TEST_CASE("class weights sum to one and order inversely to counts") {
  Rng rng(11);
  for (int t = 0; t < 1000; ++t) {
    ClassCounts c{};
    for (auto& x : c) x = 1 + static_cast<std::int64_t>(uniform_below(rng, 5000));
    const auto w = class_weights(c);
    CHECK(std::fabs(w[0] + w[1] + w[2] - 1.0) <= 1e-12);
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) {
        if (c[i] < c[j]) CHECK(w[i] > w[j]);
      }
    }
  }
}

TEST_CASE("budget allocation examples") {
  CHECK(allocate_budget({295, 446, 2735}, 2004).k == ClassCounts{1133, 749, 122});
  CHECK(allocate_budget({295, 446, 2735}, 0).k == ClassCounts{0, 0, 0});
  // Equal quotas 4/3 each: one seat by remainder, tie to the first class.
  CHECK(allocate_budget({10, 10, 10}, 4).k == ClassCounts{2, 1, 1});
  CHECK(allocate_budget({10, 10, 10}, 5).k == ClassCounts{2, 2, 1});
  CHECK_THROWS_AS(allocate_budget({10, 10, 10}, -1), Error);
}

TEST_CASE("largest remainder matches the exact apportionment oracle and sums to B") {
  Rng rng(5);
  for (int t = 0; t < 3000; ++t) {
    ClassCounts c{};
    for (auto& x : c) x = 1 + static_cast<std::int64_t>(uniform_below(rng, 3000));
    const auto b = static_cast<std::int64_t>(uniform_below(rng, 5000));
    const auto k = allocate_budget(c, b).k;
    CHECK(k[0] + k[1] + k[2] == b);
    CHECK(as_vec(k) == oracle::hamilton_inverse(as_vec(c), b));
  }
}

TEST_CASE("largest remainder is not monotone in the budget") {
  // Pinned instance of the classic apportionment paradox: raising the budget
  // by one takes a seat away from the second class.
  const ClassCounts counts{5, 17, 8};
  const auto before = allocate_budget(counts, 29).k;
  const auto after = allocate_budget(counts, 30).k;
  CHECK(before == ClassCounts{15, 5, 9});
  CHECK(after == ClassCounts{16, 4, 10});
  CHECK(after[1] < before[1]);
}

TEST_CASE("divisor apportionment is monotone in the budget and sums to B") {
  Rng rng(17);
  for (int t = 0; t < 300; ++t) {
    ClassCounts c{};
    for (auto& x : c) x = 1 + static_cast<std::int64_t>(uniform_below(rng, 60));
    ClassCounts prev = allocate_budget(c, 0, Apportionment::kSainteLague).k;
    for (std::int64_t b = 1; b <= 200; ++b) {
      const auto k = allocate_budget(c, b, Apportionment::kSainteLague).k;
      CHECK(k[0] + k[1] + k[2] == b);
      for (std::size_t i = 0; i < 3; ++i) CHECK(k[i] >= prev[i]);
      prev = k;
    }
  }
  CHECK(allocate_budget({295, 446, 2735}, 2004, Apportionment::kSainteLague).k ==
        ClassCounts{1133, 749, 122});
}

TEST_CASE("low-entropy selection: single class prefix and threshold") {
  std::vector<Prediction> preds;
  const double fav[] = {0.90, 0.99, 0.80, 0.95, 0.70};
  for (int i = 0; i < 5; ++i) {
    const double rest = (1 - fav[i]) / 2;
    preds.push_back(make_prediction("c" + std::to_string(i), pv(fav[i], rest, rest)));
  }
  ClassBudget b;
  b.k = {2, 0, 0};
  const auto batch = select_low_entropy(preds, b);
  REQUIRE(batch.selected[0].size() == 2);
  CHECK(batch.selected[0][0].comment_id == "c1");
  CHECK(batch.selected[0][1].comment_id == "c3");
  CHECK(*batch.implied_thresholds[0] == preds[3].entropy);
  CHECK_FALSE(batch.implied_thresholds[1].has_value());
  CHECK_FALSE(batch.shortfall[0]);
}

TEST_CASE("low-entropy selection: shortfall returns the whole pool") {
  std::vector<Prediction> preds{make_prediction("a", pv(0.1, 0.8, 0.1)),
                                make_prediction("b", pv(0.2, 0.7, 0.1))};
  ClassBudget b;
  b.k = {0, 5, 0};
  const auto batch = select_low_entropy(preds, b);
  CHECK(batch.selected[1].size() == 2);
  CHECK(batch.shortfall[1]);
  CHECK(batch.pool_sizes[1] == 2);
}

TEST_CASE("argmax ties resolve in class order") {
  CHECK(make_prediction("x", pv(0.4, 0.4, 0.2)).predicted_class == Stance::kFavorable);
  CHECK(make_prediction("x", pv(0.2, 0.4, 0.4)).predicted_class == Stance::kAgainst);
  CHECK(make_prediction("x", pv(0.2, 0.4, 0.4)).argmax_tie);
}

TEST_CASE("merge examples") {
  LabeledSet labeled;
  for (int i = 0; i < 3; ++i) labeled.examples.push_back({"l" + std::to_string(i), stance_at(i)});
  PseudoLabelBatch empty;
  auto r = merge_datasets(labeled, empty);
  CHECK(r.merged.size() == 3);
  CHECK(*r.growth_percent == 0.0);

  PseudoLabelBatch clash;
  Prediction p;
  p.comment_id = "l1";
  p.predicted_class = Stance::kAgainst;
  clash.selected[1].push_back(p);
  CHECK_THROWS_AS(merge_datasets(labeled, clash), Error);

  PseudoLabelBatch add;
  p.comment_id = "n1";
  add.selected[1].push_back(p);
  r = merge_datasets(labeled, add);
  CHECK(r.merged.counts() == ClassCounts{1, 2, 1});
  CHECK(*r.growth_percent == doctest::Approx(100.0 / 3));
  CHECK(r.merged.examples.back().provenance == Provenance::kPseudo);
}

TEST_CASE("merged counts are the exact sums of the inputs") {
  Rng rng(23);
  for (int t = 0; t < 200; ++t) {
    LabeledSet labeled;
    PseudoLabelBatch batch;
    ClassCounts want{};
    for (std::size_t c = 0; c < 3; ++c) {
      const auto n = uniform_below(rng, 50), m = uniform_below(rng, 50);
      for (std::uint64_t i = 0; i < n; ++i) labeled.examples.push_back({"l" + std::to_string(c) + "_" + std::to_string(i), stance_at(c)});
      for (std::uint64_t i = 0; i < m; ++i) {
        Prediction p;
        p.comment_id = "p" + std::to_string(c) + "_" + std::to_string(i);
        p.predicted_class = stance_at(c);
        batch.selected[c].push_back(p);
      }
      want[c] = static_cast<std::int64_t>(n + m);
    }
    CHECK(merge_datasets(labeled, batch).merged.counts() == want);
  }
}

TEST_CASE("retention fractions") {
  std::vector<Prediction> preds;
  for (int i = 0; i < 200; ++i) {
    const double f = 0.5 + 0.4 * i / 200.0;
    preds.push_back(make_prediction("f" + std::to_string(i), pv(f, (1 - f) / 2, (1 - f) / 2)));
  }
  ClassBudget b;
  b.k = {2, 0, 0};
  const auto batch = select_low_entropy(preds, b);
  const auto r = retention_fractions(batch, preds);
  CHECK(*r[0] == doctest::Approx(0.01));
  CHECK_FALSE(r[1].has_value());

  b.k = {0, 0, 0};
  CHECK(*retention_fractions(select_low_entropy(preds, b), preds)[0] == 0.0);

  // Pool proportions mimicking the reference run: (1133, 749, 122) drawn
  // from pools of 40,000 / 30,000 / 300,000.
  std::vector<Prediction> big;
  const std::int64_t sizes[] = {40'000, 30'000, 300'000};
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::int64_t i = 0; i < sizes[c]; ++i) {
      ProbVector q;
      q.p = {0.1, 0.1, 0.1};
      q.p[c] = 0.8;
      big.push_back(make_prediction("b" + std::to_string(c) + "_" + std::to_string(i), q));
    }
  }
  b.k = {1133, 749, 122};
  const auto rb = retention_fractions(select_low_entropy(big, b), big);
  CHECK(*rb[0] == doctest::Approx(1133.0 / 40'000));
  CHECK(*rb[1] == doctest::Approx(749.0 / 30'000));
  CHECK(*rb[2] == doctest::Approx(122.0 / 300'000));
}

TEST_CASE("selection report and pseudo-label file") {
  std::vector<Prediction> preds{make_prediction("a", pv(0.9, 0.05, 0.05)),
                                make_prediction("b", pv(0.05, 0.9, 0.05)),
                                make_prediction("c", pv(0.6, 0.2, 0.2))};
  const auto budget = allocate_budget({2, 2, 2}, 3);
  const auto batch = select_low_entropy(preds, budget);
  const auto report = selection_report(budget, batch, preds, 1);
  CHECK(report["entropy_unit"] == "nats");
  CHECK(report["classes"]["FAVORABLE"]["selected"] == 1);
  CHECK(report["classes"]["INCONCLUSIVE"]["shortfall"] == true);
  // "a" and "b" share the lowest entropy, so two of three pool entries sit at or below it.
  CHECK(report["classes"]["FAVORABLE"]["induced_percentile"].get<double>() == doctest::Approx(200.0 / 3));

  const auto dir = vaxstance::testing::temp_dir("pseudo");
  save_pseudo_labels(dir / "pseudo_labels.jsonl", batch, 1);
  std::vector<json> rows;
  for_each_jsonl(dir / "pseudo_labels.jsonl", [&](const json& j, std::size_t) { rows.push_back(j); });
  REQUIRE(rows.size() == 2);
  CHECK(rows[0]["comment_id"] == "a");
  CHECK(rows[0]["stance"] == "FAVORABLE");
  CHECK(rows[0]["round"] == 1);
  CHECK(rows[0]["probs"].size() == 3);
}

TEST_CASE("labeled set round trip") {
  LabeledSet s;
  s.examples = {{"a", Stance::kAgainst, Provenance::kManual}, {"b", Stance::kFavorable, Provenance::kPseudo}};
  const auto dir = vaxstance::testing::temp_dir("labeled");
  save_labeled_set(dir / "l.jsonl", s);
  CHECK(load_labeled_set(dir / "l.jsonl").examples == s.examples);
}

}  // TEST_SUITE
