#pragma once

// Single-sample forward operations for the three layer kinds. These are the
// reference forms of the layer equations; the batched network in
// network.hpp must agree with them to rounding.

#include "surgecorr/core.hpp"
#include "surgecorr/nn/activation.hpp"

#include <cstddef>
#include <vector>

namespace surgecorr::nn {

struct DenseLayerParams {
  Matrix W;  // (out_dim, in_dim)
  Vector b;  // (out_dim)
  Activation activation = Activation::linear;

  std::size_t in_dim() const { return static_cast<std::size_t>(W.cols()); }
  std::size_t out_dim() const { return static_cast<std::size_t>(W.rows()); }
};

/// y = activation(W x + b)
inline Vector dense_forward(const DenseLayerParams& p, const Vector& x) {
  require(p.b.size() == p.W.rows(), "dense: bias length does not match W rows");
  require(x.size() == p.W.cols(), "dense: input length " + std::to_string(x.size()) +
                                      " != in_dim " + std::to_string(p.W.cols()));
  require_finite(x, "dense input");
  Vector z = p.W * x + p.b;
  return apply_activation(p.activation, z);
}

struct DenseGradients {
  Matrix dW;
  Vector db;
  Vector dx;
};

/// Backpropagates dL/dy through one dense layer evaluated at x.
inline DenseGradients dense_backward(const DenseLayerParams& p, const Vector& x, const Vector& dy) {
  require(x.size() == p.W.cols() && dy.size() == p.W.rows(), "dense backward: shape mismatch");
  const Vector z = p.W * x + p.b;
  Vector dz(z.size());
  for (Eigen::Index k = 0; k < z.size(); ++k)
    dz[k] = dy[k] * activation_derivative(p.activation, z[k], activate(p.activation, z[k]));
  return {dz * x.transpose(), dz, p.W.transpose() * dz};
}

/// Kernels are stored (filters, in_channels, kernel_size) row-major.
struct ConvLayerParams {
  std::size_t filters = 0;
  std::size_t in_channels = 1;
  std::size_t kernel_size = 0;
  std::vector<double> kernels;
  Vector biases;

  ConvLayerParams() = default;
  ConvLayerParams(std::size_t f, std::size_t c, std::size_t k)
      : filters(f), in_channels(c), kernel_size(k), kernels(f * c * k, 0.0), biases(Vector::Zero(static_cast<Eigen::Index>(f))) {}

  double& K(std::size_t j, std::size_t i, std::size_t k) { return kernels[(j * in_channels + i) * kernel_size + k]; }
  double K(std::size_t j, std::size_t i, std::size_t k) const { return kernels[(j * in_channels + i) * kernel_size + k]; }
};

/// Valid-padding, stride-1 temporal convolution with ReLU.
/// input is (T, in_channels); output is (T - kernel_size + 1, filters) with
///   out[t, j] = relu( sum_i sum_k input[t + k, i] * K[j, i, k] + B[j] ).
inline Matrix conv1d_forward(const ConvLayerParams& p, const Matrix& input) {
  require(p.filters > 0 && p.kernel_size >= 1, "conv1d: filters and kernel_size must be positive");
  require(p.kernels.size() == p.filters * p.in_channels * p.kernel_size, "conv1d: kernel storage size mismatch");
  require(static_cast<std::size_t>(p.biases.size()) == p.filters, "conv1d: bias length mismatch");
  require(static_cast<std::size_t>(input.cols()) == p.in_channels, "conv1d: channel count mismatch");
  const auto T = static_cast<std::size_t>(input.rows());
  require(T >= p.kernel_size, "conv1d: sequence length " + std::to_string(T) + " shorter than kernel " +
                                  std::to_string(p.kernel_size));
  require_finite(input, "conv1d input");

  const std::size_t L = T - p.kernel_size + 1;
  Matrix out(static_cast<Eigen::Index>(L), static_cast<Eigen::Index>(p.filters));
  for (std::size_t t = 0; t < L; ++t) {
    for (std::size_t j = 0; j < p.filters; ++j) {
      double acc = p.biases[static_cast<Eigen::Index>(j)];
      for (std::size_t i = 0; i < p.in_channels; ++i)
        for (std::size_t k = 0; k < p.kernel_size; ++k)
          acc += input(static_cast<Eigen::Index>(t + k), static_cast<Eigen::Index>(i)) * p.K(j, i, k);
      out(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = activate(Activation::relu, acc);
    }
  }
  return out;
}

/// Gate weights have shape (units, units + input_dim) and act on the
/// concatenation [h_{t-1}, x_t] in that order.
struct LstmLayerParams {
  std::size_t units = 0;
  std::size_t input_dim = 0;
  Matrix W_f, W_i, W_c, W_o;
  Vector b_f, b_i, b_c, b_o;

  LstmLayerParams() = default;
  LstmLayerParams(std::size_t u, std::size_t d) : units(u), input_dim(d) {
    const auto rows = static_cast<Eigen::Index>(u);
    const auto cols = static_cast<Eigen::Index>(u + d);
    W_f = W_i = W_c = W_o = Matrix::Zero(rows, cols);
    b_f = b_i = b_c = b_o = Vector::Zero(rows);
  }

  void validate() const {
    require(units > 0, "lstm: units must be positive");
    const auto rows = static_cast<Eigen::Index>(units);
    const auto cols = static_cast<Eigen::Index>(units + input_dim);
    for (const Matrix* W : {&W_f, &W_i, &W_c, &W_o})
      require(W->rows() == rows && W->cols() == cols, "lstm: gate weight shape mismatch");
    for (const Vector* b : {&b_f, &b_i, &b_c, &b_o}) require(b->size() == rows, "lstm: gate bias shape mismatch");
  }
};

struct LstmState {
  Vector h;
  Vector C;

  static LstmState zeros(std::size_t units) {
    const auto n = static_cast<Eigen::Index>(units);
    return {Vector::Zero(n), Vector::Zero(n)};
  }
};

/// Gate activations of one step, exposed for tests and diagnostics.
struct LstmGates {
  Vector f, i, c_tilde, o;
};

inline LstmState lstm_cell_step(const LstmLayerParams& p, const LstmState& state, const Vector& x_t,
                                LstmGates* gates = nullptr) {
  p.validate();
  const auto U = static_cast<Eigen::Index>(p.units);
  require(state.h.size() == U && state.C.size() == U, "lstm: state dimension != units");
  require(x_t.size() == static_cast<Eigen::Index>(p.input_dim), "lstm: input length != input_dim");
  require_finite(x_t, "lstm input");

  Vector hx(U + x_t.size());
  hx << state.h, x_t;

  const auto sig = [](double v) { return sigmoid(v); };
  const auto th = [](double v) { return std::tanh(v); };
  Vector f = (p.W_f * hx + p.b_f).unaryExpr(sig);
  Vector i = (p.W_i * hx + p.b_i).unaryExpr(sig);
  Vector c_tilde = (p.W_c * hx + p.b_c).unaryExpr(th);
  Vector C = f.cwiseProduct(state.C) + i.cwiseProduct(c_tilde);
  Vector o = (p.W_o * hx + p.b_o).unaryExpr(sig);
  Vector h = o.cwiseProduct(C.unaryExpr(th));

  if (gates) *gates = {std::move(f), std::move(i), std::move(c_tilde), std::move(o)};
  return {std::move(h), std::move(C)};
}

/// Runs the cell over seq (T, input_dim) from a zero state; returns every
/// hidden state as a (T, units) matrix.
inline Matrix lstm_layer_forward(const LstmLayerParams& p, const Matrix& seq) {
  require(seq.rows() >= 1, "lstm: empty sequence");
  require(seq.cols() == static_cast<Eigen::Index>(p.input_dim), "lstm: feature count != input_dim");
  LstmState state = LstmState::zeros(p.units);
  Matrix out(seq.rows(), static_cast<Eigen::Index>(p.units));
  for (Eigen::Index t = 0; t < seq.rows(); ++t) {
    state = lstm_cell_step(p, state, seq.row(t).transpose());
    out.row(t) = state.h.transpose();
  }
  return out;
}

}  // namespace surgecorr::nn
