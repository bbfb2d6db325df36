#pragma once

#include "surgecorr/core.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace surgecorr::pipeline {

/// Min-max scaler in feet. Fit it on training offsets only.
struct ScalerParams {
  double min = 0.0;
  double max = 1.0;

  bool degenerate() const { return !(max > min); }

  /// (x - min) / (max - min); no clamping, so test values outside the
  /// training range land outside [0, 1]. A degenerate scaler maps to 0.
  double scale(double x) const { return degenerate() ? 0.0 : (x - min) / (max - min); }
  double unscale(double y) const { return degenerate() ? min : y * (max - min) + min; }

  std::vector<double> scale(std::span<const double> xs) const {
    std::vector<double> out(xs.size());
    std::transform(xs.begin(), xs.end(), out.begin(), [this](double x) { return scale(x); });
    return out;
  }
  std::vector<double> unscale(std::span<const double> ys) const {
    std::vector<double> out(ys.size());
    std::transform(ys.begin(), ys.end(), out.begin(), [this](double y) { return unscale(y); });
    return out;
  }

  friend bool operator==(const ScalerParams&, const ScalerParams&) = default;
};

/// Min/max over the finite values; NaN entries are ignored.
inline ScalerParams fit_scaler(std::span<const double> train_values) {
  bool any = false;
  double lo = 0.0, hi = 0.0;
  for (double v : train_values) {
    if (!std::isfinite(v)) continue;
    if (!any) {
      lo = hi = v;
      any = true;
    } else {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!any) throw Error("fit_scaler: no finite training values");
  return {lo, hi};
}

}  // namespace surgecorr::pipeline
