#pragma once

#include "surgecorr/core.hpp"

#include <cmath>
#include <cstddef>
#include <span>
#include <string>

namespace surgecorr::eval {

namespace detail {
inline void check_pair(std::span<const double> y, std::span<const double> y_hat, std::size_t min_len, const char* what) {
  if (y.size() != y_hat.size())
    throw ShapeError(std::string(what) + ": length mismatch (" + std::to_string(y.size()) + " vs " +
                     std::to_string(y_hat.size()) + ")");
  if (y.size() < min_len) throw ShapeError(std::string(what) + ": need at least " + std::to_string(min_len) + " samples");
}
}  // namespace detail

inline double mse(std::span<const double> y, std::span<const double> y_hat) {
  detail::check_pair(y, y_hat, 1, "mse");
  double acc = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    const double d = y[k] - y_hat[k];
    acc += d * d;
  }
  return acc / static_cast<double>(y.size());
}

inline double rmse(std::span<const double> y, std::span<const double> y_hat) { return std::sqrt(mse(y, y_hat)); }

inline double mae(std::span<const double> y, std::span<const double> y_hat) {
  detail::check_pair(y, y_hat, 1, "mae");
  double acc = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) acc += std::abs(y[k] - y_hat[k]);
  return acc / static_cast<double>(y.size());
}

/// 1 - SS_res / SS_tot. Throws on a constant reference series.
inline double r2(std::span<const double> y, std::span<const double> y_hat) {
  detail::check_pair(y, y_hat, 2, "r2");
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    ss_res += (y[k] - y_hat[k]) * (y[k] - y_hat[k]);
    ss_tot += (y[k] - mean) * (y[k] - mean);
  }
  if (!(ss_tot > 0.0)) throw Error("r2: reference series is constant");
  return 1.0 - ss_res / ss_tot;
}

struct MetricsReport {
  double r2 = 0.0;
  double mse = 0.0;
  double rmse = 0.0;
  double mae = 0.0;
  std::size_t n = 0;
  std::string label;
};

inline MetricsReport compute_metrics(std::span<const double> y, std::span<const double> y_hat, std::string label = {}) {
  MetricsReport m;
  m.mse = mse(y, y_hat);
  m.rmse = std::sqrt(m.mse);
  m.mae = mae(y, y_hat);
  m.r2 = r2(y, y_hat);
  m.n = y.size();
  m.label = std::move(label);
  return m;
}

}  // namespace surgecorr::eval
