#pragma once

#include "surgecorr/core.hpp"

#include <cmath>
#include <string>
#include <string_view>

namespace surgecorr::nn {

enum class Activation { relu, linear, sigmoid, tanh };

inline std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::linear: return "linear";
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
  }
  return "?";
}

inline Activation activation_from_string(std::string_view s) {
  if (s == "relu") return Activation::relu;
  if (s == "linear") return Activation::linear;
  if (s == "sigmoid") return Activation::sigmoid;
  if (s == "tanh") return Activation::tanh;
  throw Error("unknown activation '" + std::string(s) + "'");
}

inline double sigmoid(double x) {
  // Split on sign so exp never overflows.
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// Scalar activation. The linear activation has unit slope.
inline double activate(Activation kind, double x) {
  if (!std::isfinite(x)) throw NonFiniteError("activation: non-finite input");
  switch (kind) {
    case Activation::relu: return x > 0.0 ? x : 0.0;
    case Activation::linear: return x;
    case Activation::sigmoid: return sigmoid(x);
    case Activation::tanh: return std::tanh(x);
  }
  return x;
}

/// Derivative expressed through the activation output y = activate(kind, x)
/// (and x itself for relu).
inline double activation_derivative(Activation kind, double x, double y) {
  switch (kind) {
    case Activation::relu: return x > 0.0 ? 1.0 : 0.0;
    case Activation::linear: return 1.0;
    case Activation::sigmoid: return y * (1.0 - y);
    case Activation::tanh: return 1.0 - y * y;
  }
  return 1.0;
}

template <typename Derived>
auto apply_activation(Activation kind, const Eigen::MatrixBase<Derived>& x) {
  using Plain = typename Derived::PlainObject;
  Plain out = x.unaryExpr([kind](double v) { return activate(kind, v); });
  return out;
}

}  // namespace surgecorr::nn
