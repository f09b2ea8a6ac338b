// SPDX-License-Identifier: Apache-2.0
// Reference computations written straight from the textbook definitions.
// They share no code with the library so that agreement means something.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <tuple>
#include <vector>

namespace vaxstance::oracle {

/// Shannon entropy in nats, 0 ln 0 = 0.
inline long double entropy(const std::vector<long double>& p) {
  long double h = 0;
  for (auto x : p) {
    if (x > 0) h -= x * std::log(x);
  }
  return h;
}

/// Inverse-frequency weights normalized to sum to 1.
inline std::vector<long double> inverse_frequency(const std::vector<std::int64_t>& counts) {
  long double z = 0;
  for (auto n : counts) z += 1.0L / static_cast<long double>(n);
  std::vector<long double> w;
  for (auto n : counts) w.push_back((1.0L / static_cast<long double>(n)) / z);
  return w;
}

/// Exact fraction for small integers.
struct Frac {
  __int128 num, den;
};
inline bool frac_less(const Frac& a, const Frac& b) { return a.num * b.den < b.num * a.den; }

/// Hamilton apportionment of `seats` with quotas proportional to 1/n_c,
/// remainder ties to the lowest class index. Exact.
inline std::vector<std::int64_t> hamilton_inverse(const std::vector<std::int64_t>& counts,
                                                  std::int64_t seats) {
  const std::size_t c = counts.size();
  // quota_i = seats * (1/n_i) / sum_j (1/n_j) = seats * prod_{j!=i} n_j / sum_k prod_{j!=k} n_j
  std::vector<__int128> other(c, 1);
  for (std::size_t i = 0; i < c; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      if (j != i) other[i] *= counts[j];
    }
  }
  __int128 den = 0;
  for (auto o : other) den += o;
  std::vector<std::int64_t> seats_of(c);
  std::vector<Frac> rem(c);
  std::int64_t used = 0;
  for (std::size_t i = 0; i < c; ++i) {
    const __int128 num = other[i] * seats;
    seats_of[i] = static_cast<std::int64_t>(num / den);
    rem[i] = {num % den, den};
    used += seats_of[i];
  }
  std::vector<std::size_t> order(c);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (frac_less(rem[b], rem[a])) return true;
    if (frac_less(rem[a], rem[b])) return false;
    return a < b;
  });
  for (std::int64_t k = 0; k < seats - used; ++k) ++seats_of[order[static_cast<std::size_t>(k)]];
  return seats_of;
}

/// Fleiss' kappa from its defining sums.
inline long double fleiss(const std::vector<std::vector<std::int64_t>>& rows) {
  const long double N = static_cast<long double>(rows.size());
  long double n = 0;
  for (auto x : rows.front()) n += static_cast<long double>(x);
  const std::size_t k = rows.front().size();
  std::vector<long double> pj(k, 0);
  long double pbar = 0;
  for (const auto& r : rows) {
    long double s = 0;
    for (std::size_t j = 0; j < k; ++j) {
      pj[j] += static_cast<long double>(r[j]);
      s += static_cast<long double>(r[j]) * static_cast<long double>(r[j] - 1);
    }
    pbar += s / (n * (n - 1));
  }
  pbar /= N;
  long double pe = 0;
  for (auto& x : pj) {
    x /= N * n;
    pe += x * x;
  }
  return (pbar - pe) / (1 - pe);
}

/// Student t density.
inline long double t_pdf(long double x, long double df) {
  const long double c = std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2)) /
                        std::sqrt(df * 3.14159265358979323846264338327950288L);
  return c * std::pow(1 + x * x / df, -(df + 1) / 2);
}

/// Quantile by bisection on a composite Simpson integral of the density
/// from 0 (the distribution is symmetric, so F(x) = 0.5 + integral).
inline long double t_quantile(long double p, long double df) {
  auto cdf = [&](long double x) {
    const int n = 20000;
    const long double h = x / n;
    long double s = t_pdf(0, df) + t_pdf(x, df);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4 : 2) * t_pdf(i * h, df);
    return 0.5L + s * h / 3;
  };
  long double lo = 0, hi = 1;
  while (cdf(hi) < p) hi *= 2;
  for (int it = 0; it < 80; ++it) {
    const long double mid = (lo + hi) / 2;
    (cdf(mid) < p ? lo : hi) = mid;
  }
  return (lo + hi) / 2;
}

/// Per-class precision/recall/F1 from a confusion matrix; 0 when undefined.
struct Prf {
  double precision, recall, f1;
};
inline std::vector<Prf> prf(const std::vector<int>& truth, const std::vector<int>& pred, int classes) {
  std::vector<std::vector<long long>> cm(classes, std::vector<long long>(classes, 0));
  for (std::size_t i = 0; i < truth.size(); ++i) ++cm[truth[i]][pred[i]];
  std::vector<Prf> out;
  for (int c = 0; c < classes; ++c) {
    long long tp = cm[c][c], col = 0, row = 0;
    for (int j = 0; j < classes; ++j) {
      col += cm[j][c];
      row += cm[c][j];
    }
    const double p = col ? static_cast<double>(tp) / static_cast<double>(col) : 0.0;
    const double r = row ? static_cast<double>(tp) / static_cast<double>(row) : 0.0;
    out.push_back({p, r, p + r > 0 ? 2 * p * r / (p + r) : 0.0});
  }
  return out;
}

}  // namespace vaxstance::oracle
