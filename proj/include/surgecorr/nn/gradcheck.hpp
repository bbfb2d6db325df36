#pragma once

#include "surgecorr/core.hpp"
#include "surgecorr/nn/network.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace surgecorr::nn {

/// Central differences (L(theta + h e_k) - L(theta - h e_k)) / 2h for every k.
inline std::vector<double> finite_difference_gradient(const std::function<double(std::span<const double>)>& loss,
                                                      std::span<const double> theta, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw Error("finite difference: step h must be positive and finite");
  std::vector<double> probe(theta.begin(), theta.end());
  std::vector<double> grad(theta.size());
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const double orig = probe[k];
    probe[k] = orig + h;
    const double up = loss(probe);
    probe[k] = orig - h;
    const double down = loss(probe);
    probe[k] = orig;
    if (!std::isfinite(up) || !std::isfinite(down)) throw NonFiniteError("finite difference: non-finite loss");
    grad[k] = (up - down) / (2.0 * h);
  }
  return grad;
}

inline std::vector<double> finite_difference_gradient(const Network& net, const BatchMatrix& inputs,
                                                      const BatchMatrix& targets, double h) {
  return finite_difference_gradient(
      [&](std::span<const double> theta) {
        Network probe(net.config(), std::vector<double>(theta.begin(), theta.end()));
        return probe.loss(inputs, targets);
      },
      net.parameters(), h);
}

/// |a - b| / max(|a|, |b|, floor). The floor keeps parameters with
/// vanishing gradients from dominating through rounding noise.
inline double max_relative_error(std::span<const double> a, std::span<const double> b, double floor = 1e-6) {
  if (a.size() != b.size()) throw ShapeError("relative error: length mismatch");
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double denom = std::max({std::abs(a[k]), std::abs(b[k]), floor});
    worst = std::max(worst, std::abs(a[k] - b[k]) / denom);
  }
  return worst;
}

}  // namespace surgecorr::nn
