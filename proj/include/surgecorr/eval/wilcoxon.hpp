#pragma once

#include "surgecorr/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string_view>
#include <vector>

namespace surgecorr::eval {

enum class WilcoxonMethod { exact, normal_approximation };

inline std::string_view to_string(WilcoxonMethod m) {
  return m == WilcoxonMethod::exact ? "exact" : "normal-approximation";
}

struct WilcoxonResult {
  double statistic = 0.0;  // min(W+, W-)
  double p_value = 1.0;    // two-sided
  std::size_t n_effective = 0;
  WilcoxonMethod method = WilcoxonMethod::exact;
};

/// All paired differences were zero; the test is undefined.
class DegenerateTestError : public Error {
 public:
  using Error::Error;
};

inline constexpr std::size_t kWilcoxonExactLimit = 15;

/// Midranks of |d| (1-based), multiplied by two so ties stay integral.
inline std::vector<std::int64_t> doubled_midranks(std::span<const double> abs_d) {
  const std::size_t n = abs_d.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return abs_d[a] < abs_d[b]; });
  std::vector<std::int64_t> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && abs_d[order[j + 1]] == abs_d[order[i]]) ++j;
    // positions i..j (0-based) share rank ((i+1) + (j+1)) / 2
    const auto doubled = static_cast<std::int64_t>(i + j + 2);
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = doubled;
    i = j + 1;
  }
  return ranks;
}

/// Paired signed-rank test on d = a - b. Zero differences are dropped, tied
/// |d| share midranks. Exact null distribution up to kWilcoxonExactLimit
/// nonzero pairs, normal approximation with tie and continuity correction
/// beyond.
inline WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("wilcoxon: samples must be paired (equal length)");
  std::vector<double> d;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    if (!std::isfinite(diff)) throw NonFiniteError("wilcoxon: non-finite difference");
    if (diff != 0.0) d.push_back(diff);
  }
  const std::size_t n = d.size();
  if (n == 0) throw DegenerateTestError("wilcoxon: all paired differences are zero");

  std::vector<double> abs_d(n);
  std::transform(d.begin(), d.end(), abs_d.begin(), [](double x) { return std::abs(x); });
  const auto ranks = doubled_midranks(abs_d);

  std::int64_t w_plus = 0, total = 0;
  for (std::size_t k = 0; k < n; ++k) {
    total += ranks[k];
    if (d[k] > 0) w_plus += ranks[k];
  }
  const std::int64_t stat2 = std::min(w_plus, total - w_plus);

  WilcoxonResult r;
  r.statistic = static_cast<double>(stat2) / 2.0;
  r.n_effective = n;

  if (n <= kWilcoxonExactLimit) {
    // counts[s]: number of sign assignments whose doubled W+ equals s.
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(total) + 1, 0);
    counts[0] = 1;
    std::int64_t reach = 0;
    for (std::int64_t rk : ranks) {
      for (std::int64_t s = reach; s >= 0; --s)
        if (counts[static_cast<std::size_t>(s)]) counts[static_cast<std::size_t>(s + rk)] += counts[static_cast<std::size_t>(s)];
      reach += rk;
    }
    std::uint64_t extreme = 0;
    for (std::int64_t s = 0; s <= total; ++s)
      if (std::min(s, total - s) <= stat2) extreme += counts[static_cast<std::size_t>(s)];
    r.p_value = static_cast<double>(extreme) / std::ldexp(1.0, static_cast<int>(n));
    r.method = WilcoxonMethod::exact;
    return r;
  }

  const double nn = static_cast<double>(n);
  const double mean = nn * (nn + 1.0) / 4.0;
  double tie_term = 0.0;
  {
    std::vector<std::int64_t> sorted = ranks;
    std::sort(sorted.begin(), sorted.end());
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j < n && sorted[j] == sorted[i]) ++j;
      const double t = static_cast<double>(j - i);
      tie_term += t * t * t - t;
      i = j;
    }
  }
  const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
  const double z = std::max(0.0, std::abs(r.statistic - mean) - 0.5) / std::sqrt(var);
  r.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  r.method = WilcoxonMethod::normal_approximation;
  return r;
}

inline bool significantly_different(const WilcoxonResult& r, double alpha = 0.05) { return r.p_value < alpha; }

}  // namespace surgecorr::eval
