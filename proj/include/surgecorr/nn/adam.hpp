#pragma once

#include "surgecorr/core.hpp"

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace surgecorr::nn {

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t t = 0;
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState for_parameters(std::size_t n, double lr = 0.001) {
    AdamState s;
    s.m.assign(n, 0.0);
    s.v.assign(n, 0.0);
    s.lr = lr;
    return s;
  }

  void validate() const {
    if (m.size() != v.size()) throw ShapeError("adam: moment vectors differ in length");
    if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) throw Error("adam: betas must lie in (0,1)");
    if (!(eps > 0.0)) throw Error("adam: eps must be positive");
    if (!(lr >= 0.0)) throw Error("adam: learning rate must be non-negative");
  }
};

/// One bias-corrected Adam step; increments state.t before use.
inline void adam_update(AdamState& state, std::span<double> params, std::span<const double> grad) {
  state.validate();
  if (params.size() != grad.size() || params.size() != state.m.size())
    throw ShapeError("adam: length mismatch (params " + std::to_string(params.size()) + ", grad " +
                     std::to_string(grad.size()) + ", state " + std::to_string(state.m.size()) + ")");
  ++state.t;
  const double b1 = state.beta1, b2 = state.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double gk = grad[k];
    state.m[k] = b1 * state.m[k] + (1.0 - b1) * gk;
    state.v[k] = b2 * state.v[k] + (1.0 - b2) * gk * gk;
    const double m_hat = state.m[k] / c1;
    const double v_hat = state.v[k] / c2;
    params[k] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
  }
}

}  // namespace surgecorr::nn
