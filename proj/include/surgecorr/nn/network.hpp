#pragma once

// Conv1D(ReLU) -> LSTM -> LSTM -> Dense(tanh, per step) -> Flatten -> Dense(linear)
//
// All parameters live in one flat vector in canonical order:
//   conv kernels (filters, 1, kernel) | conv biases (filters)
//   lstm1 W_f W_i W_c W_o, each (units1, units1 + filters) | b_f b_i b_c b_o
//   lstm2 W_f W_i W_c W_o, each (units2, units2 + units1)  | b_f b_i b_c b_o
//   dense W (dense, units2) | dense b (dense)
//   output W (w_out, L * dense) | output b (w_out)
// where L = w_in - kernel + 1 and every matrix is row-major. The flatten
// index of step t, feature j is t * dense + j.
//
// Batched tensors are column-major with one column per (step, sample):
// column t * B + b holds step t of sample b.

#include "surgecorr/core.hpp"
#include "surgecorr/nn/activation.hpp"
#include "surgecorr/nn/layers.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace surgecorr::nn {

struct NetworkConfig {
  std::size_t w_in = 15;
  std::size_t w_out = 1;
  std::size_t conv_filters = 32;
  std::size_t conv_kernel = 3;
  std::size_t lstm1_units = 128;
  std::size_t lstm2_units = 256;
  std::size_t dense_units = 128;

  void validate() const {
    if (conv_filters == 0 || conv_kernel == 0 || lstm1_units == 0 || lstm2_units == 0 || dense_units == 0)
      throw Error("network config: layer widths must be positive");
    if (w_out == 0) throw Error("network config: w_out must be at least 1");
    if (w_in < conv_kernel)
      throw Error("network config: w_in (" + std::to_string(w_in) + ") shorter than conv kernel (" +
                  std::to_string(conv_kernel) + ")");
  }

  /// Number of time steps the convolution emits.
  std::size_t conv_length() const { return w_in - conv_kernel + 1; }
  std::size_t flatten_width() const { return conv_length() * dense_units; }

  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

/// Offsets of each parameter block inside the flat vector.
struct ParameterLayout {
  std::size_t conv_k, conv_b;
  std::size_t lstm1_w, lstm1_b;
  std::size_t lstm2_w, lstm2_b;
  std::size_t dense_w, dense_b;
  std::size_t out_w, out_b;
  std::size_t total;

  explicit ParameterLayout(const NetworkConfig& c) {
    std::size_t at = 0;
    auto take = [&at](std::size_t n) {
      const std::size_t start = at;
      at += n;
      return start;
    };
    const std::size_t F = c.conv_filters, U1 = c.lstm1_units, U2 = c.lstm2_units, Dn = c.dense_units;
    conv_k = take(F * c.conv_kernel);
    conv_b = take(F);
    lstm1_w = take(4 * U1 * (U1 + F));
    lstm1_b = take(4 * U1);
    lstm2_w = take(4 * U2 * (U2 + U1));
    lstm2_b = take(4 * U2);
    dense_w = take(Dn * U2);
    dense_b = take(Dn);
    out_w = take(c.w_out * c.flatten_width());
    out_b = take(c.w_out);
    total = at;
  }
};

inline std::size_t parameter_count(const NetworkConfig& c) { return ParameterLayout(c).total; }

/// Vectorized reductions depend on buffer alignment; keeping parameters and
/// gradients at Eigen's maximum alignment makes results bit-reproducible.
using AlignedBuffer = std::vector<double, Eigen::aligned_allocator<double>>;

namespace detail {

using ConstRowMap = Eigen::Map<const Matrix>;
using RowMap = Eigen::Map<Matrix>;
using ConstVecMap = Eigen::Map<const Vector>;
using VecMap = Eigen::Map<Vector>;

struct LstmCache {
  BatchMatrix gates;      // (4U, L*B) post-activation f, i, c~, o
  BatchMatrix cell;       // (U, L*B)
  BatchMatrix tanh_cell;  // (U, L*B)
  BatchMatrix hidden;     // (U, L*B)
};

inline double sigmoid_fast(double x) { return sigmoid(x); }

inline void lstm_forward(const double* w, const double* b, std::size_t units, std::size_t in_dim,
                         const BatchMatrix& in, std::size_t L, std::size_t B, LstmCache& c) {
  const auto U = static_cast<Eigen::Index>(units);
  const auto D = static_cast<Eigen::Index>(in_dim);
  const auto nb = static_cast<Eigen::Index>(B);
  ConstRowMap W(w, 4 * U, U + D);
  ConstVecMap bias(b, 4 * U);

  c.gates.noalias() = W.rightCols(D) * in;
  c.gates.colwise() += bias;
  c.cell.resize(U, in.cols());
  c.tanh_cell.resize(U, in.cols());
  c.hidden.resize(U, in.cols());

  for (std::size_t t = 0; t < L; ++t) {
    const auto col = static_cast<Eigen::Index>(t) * nb;
    auto z = c.gates.middleCols(col, nb);
    if (t > 0) z.noalias() += W.leftCols(U) * c.hidden.middleCols(col - nb, nb);
    z.topRows(2 * U) = z.topRows(2 * U).unaryExpr(&sigmoid_fast);
    z.middleRows(2 * U, U) = z.middleRows(2 * U, U).array().tanh();
    z.bottomRows(U) = z.bottomRows(U).unaryExpr(&sigmoid_fast);

    auto cell = c.cell.middleCols(col, nb);
    if (t > 0)
      cell = z.topRows(U).cwiseProduct(c.cell.middleCols(col - nb, nb)) +
             z.middleRows(U, U).cwiseProduct(z.middleRows(2 * U, U));
    else
      cell = z.middleRows(U, U).cwiseProduct(z.middleRows(2 * U, U));
    c.tanh_cell.middleCols(col, nb) = cell.array().tanh();
    c.hidden.middleCols(col, nb) = z.bottomRows(U).cwiseProduct(c.tanh_cell.middleCols(col, nb));
  }
}

/// Accumulates weight/bias gradients into gw/gb and returns dL/d(input).
inline BatchMatrix lstm_backward(const double* w, std::size_t units, std::size_t in_dim, const BatchMatrix& in,
                                 std::size_t L, std::size_t B, const LstmCache& c, const BatchMatrix& d_hidden,
                                 double* gw, double* gb) {
  const auto U = static_cast<Eigen::Index>(units);
  const auto D = static_cast<Eigen::Index>(in_dim);
  const auto nb = static_cast<Eigen::Index>(B);
  ConstRowMap W(w, 4 * U, U + D);
  RowMap gW(gw, 4 * U, U + D);
  VecMap gB(gb, 4 * U);

  BatchMatrix dz(4 * U, in.cols());
  BatchMatrix dh_next = BatchMatrix::Zero(U, nb);
  BatchMatrix dc_next = BatchMatrix::Zero(U, nb);
  BatchMatrix dC(U, nb);

  for (std::size_t s = L; s-- > 0;) {
    const auto col = static_cast<Eigen::Index>(s) * nb;
    const auto g = c.gates.middleCols(col, nb);
    const auto f = g.topRows(U).array();
    const auto i = g.middleRows(U, U).array();
    const auto ct = g.middleRows(2 * U, U).array();
    const auto o = g.bottomRows(U).array();
    const auto tc = c.tanh_cell.middleCols(col, nb).array();
    const auto dh = d_hidden.middleCols(col, nb).array() + dh_next.array();

    dC.array() = dh * o * (1.0 - tc * tc) + dc_next.array();
    auto dzt = dz.middleCols(col, nb);
    if (s > 0)
      dzt.topRows(U).array() = dC.array() * c.cell.middleCols(col - nb, nb).array() * f * (1.0 - f);
    else
      dzt.topRows(U).setZero();
    dzt.middleRows(U, U).array() = dC.array() * ct * i * (1.0 - i);
    dzt.middleRows(2 * U, U).array() = dC.array() * i * (1.0 - ct * ct);
    dzt.bottomRows(U).array() = dh * tc * o * (1.0 - o);

    dc_next.array() = dC.array() * f;
    if (s > 0) dh_next.noalias() = W.leftCols(U).transpose() * dzt;
  }

  if (L > 1) {
    const auto n = static_cast<Eigen::Index>(L - 1) * nb;
    gW.leftCols(U).noalias() += dz.rightCols(n) * c.hidden.leftCols(n).transpose();
  }
  gW.rightCols(D).noalias() += dz * in.transpose();
  gB += dz.rowwise().sum();
  BatchMatrix d_in;
  d_in.noalias() = W.rightCols(D).transpose() * dz;
  return d_in;
}

}  // namespace detail

/// Intermediates of one batched forward pass, consumed by backward().
struct ForwardCache {
  std::size_t batch = 0;
  BatchMatrix input;      // (w_in, B)
  BatchMatrix conv_pre;   // (filters, L*B)
  BatchMatrix conv_out;   // (filters, L*B)
  detail::LstmCache lstm1, lstm2;
  BatchMatrix dense_out;  // (dense, L*B)
  BatchMatrix output;     // (w_out, B)

  bool valid() const { return batch > 0 && output.cols() == static_cast<Eigen::Index>(batch); }
};

class Network {
 public:
  Network(NetworkConfig config, std::vector<double> params)
      : config_(config), layout_((config.validate(), config)), params_(params.begin(), params.end()) {
    if (params_.size() != layout_.total)
      throw ShapeError("network: parameter vector has " + std::to_string(params_.size()) + " values, expected " +
                       std::to_string(layout_.total));
  }

  /// Glorot-uniform weights from a seeded stream; zero biases except the
  /// LSTM forget gate, which starts at 1.
  static Network initialize(const NetworkConfig& config, std::uint64_t seed) {
    config.validate();
    const ParameterLayout lay(config);
    std::vector<double> p(lay.total, 0.0);
    std::mt19937_64 rng(mix_seed(seed));
    auto fill = [&](std::size_t at, std::size_t n, double fan_in, double fan_out) {
      const double limit = std::sqrt(6.0 / (fan_in + fan_out));
      for (std::size_t k = 0; k < n; ++k) p[at + k] = (2.0 * unit_uniform(rng()) - 1.0) * limit;
    };
    const auto F = static_cast<double>(config.conv_filters), K = static_cast<double>(config.conv_kernel);
    const auto U1 = config.lstm1_units, U2 = config.lstm2_units, Dn = config.dense_units;

    fill(lay.conv_k, config.conv_filters * config.conv_kernel, K, F * K);
    fill(lay.lstm1_w, 4 * U1 * (U1 + config.conv_filters), static_cast<double>(U1 + config.conv_filters),
         static_cast<double>(U1));
    for (std::size_t k = 0; k < U1; ++k) p[lay.lstm1_b + k] = 1.0;
    fill(lay.lstm2_w, 4 * U2 * (U2 + U1), static_cast<double>(U2 + U1), static_cast<double>(U2));
    for (std::size_t k = 0; k < U2; ++k) p[lay.lstm2_b + k] = 1.0;
    fill(lay.dense_w, Dn * U2, static_cast<double>(U2), static_cast<double>(Dn));
    fill(lay.out_w, config.w_out * config.flatten_width(), static_cast<double>(config.flatten_width()),
         static_cast<double>(config.w_out));
    return Network(config, std::move(p));
  }

  const NetworkConfig& config() const { return config_; }
  const ParameterLayout& layout() const { return layout_; }
  std::span<const double> parameters() const { return params_; }
  std::span<double> mutable_parameters() { return params_; }
  std::size_t parameter_count() const { return params_.size(); }

  /// Batched forward pass; inputs is (w_in, B). Returns (w_out, B).
  BatchMatrix forward(const BatchMatrix& inputs) const {
    ForwardCache cache;
    forward(inputs, cache);
    return std::move(cache.output);
  }

  void forward(const BatchMatrix& inputs, ForwardCache& cache) const {
    const auto& c = config_;
    require(inputs.rows() == static_cast<Eigen::Index>(c.w_in),
            "network: input rows " + std::to_string(inputs.rows()) + " != w_in " + std::to_string(c.w_in));
    require(inputs.cols() >= 1, "network: empty batch");
    require_finite(inputs, "network input");

    const std::size_t B = static_cast<std::size_t>(inputs.cols());
    const std::size_t L = c.conv_length();
    const auto nb = static_cast<Eigen::Index>(B);
    const auto F = static_cast<Eigen::Index>(c.conv_filters);
    const auto Kz = static_cast<Eigen::Index>(c.conv_kernel);
    const auto LB = static_cast<Eigen::Index>(L * B);
    const double* p = params_.data();

    cache.batch = 0;
    cache.input = inputs;

    detail::ConstRowMap kernel(p + layout_.conv_k, F, Kz);
    detail::ConstVecMap conv_b(p + layout_.conv_b, F);
    cache.conv_pre.resize(F, LB);
    for (std::size_t t = 0; t < L; ++t) {
      auto zt = cache.conv_pre.middleCols(static_cast<Eigen::Index>(t) * nb, nb);
      zt.noalias() = kernel * inputs.middleRows(static_cast<Eigen::Index>(t), Kz);
      zt.colwise() += conv_b;
    }
    cache.conv_out = cache.conv_pre.cwiseMax(0.0);

    detail::lstm_forward(p + layout_.lstm1_w, p + layout_.lstm1_b, c.lstm1_units, c.conv_filters, cache.conv_out,
                         L, B, cache.lstm1);
    detail::lstm_forward(p + layout_.lstm2_w, p + layout_.lstm2_b, c.lstm2_units, c.lstm1_units,
                         cache.lstm1.hidden, L, B, cache.lstm2);

    const auto Dn = static_cast<Eigen::Index>(c.dense_units);
    detail::ConstRowMap dense_w(p + layout_.dense_w, Dn, static_cast<Eigen::Index>(c.lstm2_units));
    detail::ConstVecMap dense_b(p + layout_.dense_b, Dn);
    cache.dense_out.noalias() = dense_w * cache.lstm2.hidden;
    cache.dense_out.colwise() += dense_b;
    cache.dense_out = cache.dense_out.array().tanh();

    const auto Wout = static_cast<Eigen::Index>(c.w_out);
    detail::ConstRowMap out_w(p + layout_.out_w, Wout, static_cast<Eigen::Index>(c.flatten_width()));
    detail::ConstVecMap out_b(p + layout_.out_b, Wout);
    cache.output = out_b.replicate(1, nb);
    for (std::size_t t = 0; t < L; ++t)
      cache.output.noalias() += out_w.middleCols(static_cast<Eigen::Index>(t) * Dn, Dn) *
                                cache.dense_out.middleCols(static_cast<Eigen::Index>(t) * nb, nb);

    require_finite(cache.output, "network output");
    cache.batch = B;
  }

  /// Mean squared error over every (lead, sample) entry.
  static double mse_loss(const BatchMatrix& prediction, const BatchMatrix& targets) {
    require(prediction.rows() == targets.rows() && prediction.cols() == targets.cols(),
            "loss: prediction/target shape mismatch");
    return (prediction - targets).squaredNorm() / static_cast<double>(prediction.size());
  }

  double loss(const BatchMatrix& inputs, const BatchMatrix& targets) const {
    return mse_loss(forward(inputs), targets);
  }

  /// Exact gradient of mse_loss with respect to every parameter, written in
  /// canonical order into grad. Returns the loss.
  double backward(const ForwardCache& cache, const BatchMatrix& targets, std::span<double> grad) const {
    if (!cache.valid()) throw Error("network backward: no forward cache (run forward first)");
    require(grad.size() == params_.size(), "network backward: gradient buffer has wrong length");
    const auto& c = config_;
    require(targets.rows() == static_cast<Eigen::Index>(c.w_out) &&
                targets.cols() == static_cast<Eigen::Index>(cache.batch),
            "network backward: target shape mismatch");

    AlignedBuffer scratch(grad.size(), 0.0);
    const std::size_t B = cache.batch;
    const std::size_t L = c.conv_length();
    const auto nb = static_cast<Eigen::Index>(B);
    const auto F = static_cast<Eigen::Index>(c.conv_filters);
    const auto Kz = static_cast<Eigen::Index>(c.conv_kernel);
    const auto Dn = static_cast<Eigen::Index>(c.dense_units);
    const auto U2 = static_cast<Eigen::Index>(c.lstm2_units);
    const auto Wout = static_cast<Eigen::Index>(c.w_out);
    const double* p = params_.data();
    double* g = scratch.data();

    const BatchMatrix diff = cache.output - targets;
    const double loss = diff.squaredNorm() / static_cast<double>(diff.size());
    const BatchMatrix d_out = diff * (2.0 / static_cast<double>(diff.size()));

    // Output dense over the flattened sequence.
    detail::ConstRowMap out_w(p + layout_.out_w, Wout, static_cast<Eigen::Index>(c.flatten_width()));
    detail::RowMap g_out_w(g + layout_.out_w, Wout, static_cast<Eigen::Index>(c.flatten_width()));
    detail::VecMap(g + layout_.out_b, Wout) = d_out.rowwise().sum();
    BatchMatrix d_dense(Dn, static_cast<Eigen::Index>(L * B));
    for (std::size_t t = 0; t < L; ++t) {
      const auto fc = static_cast<Eigen::Index>(t) * Dn;
      const auto bc = static_cast<Eigen::Index>(t) * nb;
      g_out_w.middleCols(fc, Dn).noalias() = d_out * cache.dense_out.middleCols(bc, nb).transpose();
      d_dense.middleCols(bc, nb).noalias() = out_w.middleCols(fc, Dn).transpose() * d_out;
    }

    // Per-step tanh dense.
    d_dense.array() *= 1.0 - cache.dense_out.array().square();
    detail::ConstRowMap dense_w(p + layout_.dense_w, Dn, U2);
    detail::RowMap(g + layout_.dense_w, Dn, U2).noalias() = d_dense * cache.lstm2.hidden.transpose();
    detail::VecMap(g + layout_.dense_b, Dn) = d_dense.rowwise().sum();
    BatchMatrix d_h2;
    d_h2.noalias() = dense_w.transpose() * d_dense;

    BatchMatrix d_h1 = detail::lstm_backward(p + layout_.lstm2_w, c.lstm2_units, c.lstm1_units, cache.lstm1.hidden,
                                             L, B, cache.lstm2, d_h2, g + layout_.lstm2_w, g + layout_.lstm2_b);
    BatchMatrix d_conv = detail::lstm_backward(p + layout_.lstm1_w, c.lstm1_units, c.conv_filters, cache.conv_out,
                                               L, B, cache.lstm1, d_h1, g + layout_.lstm1_w, g + layout_.lstm1_b);

    d_conv.array() *= (cache.conv_pre.array() > 0.0).cast<double>();
    detail::RowMap g_kernel(g + layout_.conv_k, F, Kz);
    for (std::size_t t = 0; t < L; ++t)
      g_kernel.noalias() += d_conv.middleCols(static_cast<Eigen::Index>(t) * nb, nb) *
                            cache.input.middleRows(static_cast<Eigen::Index>(t), Kz).transpose();
    detail::VecMap(g + layout_.conv_b, F) = d_conv.rowwise().sum();
    std::copy(scratch.begin(), scratch.end(), grad.begin());
    return loss;
  }

  /// Convenience: forward + backward in one call.
  double gradient(const BatchMatrix& inputs, const BatchMatrix& targets, std::span<double> grad) const {
    ForwardCache cache;
    forward(inputs, cache);
    return backward(cache, targets, grad);
  }

  // Per-layer views in the single-sample parameter structs.

  ConvLayerParams conv_layer() const {
    ConvLayerParams cp(config_.conv_filters, 1, config_.conv_kernel);
    std::copy_n(params_.begin() + static_cast<std::ptrdiff_t>(layout_.conv_k), cp.kernels.size(), cp.kernels.begin());
    cp.biases = detail::ConstVecMap(params_.data() + layout_.conv_b, static_cast<Eigen::Index>(config_.conv_filters));
    return cp;
  }

  LstmLayerParams lstm1_layer() const { return lstm_layer(layout_.lstm1_w, layout_.lstm1_b, config_.lstm1_units, config_.conv_filters); }
  LstmLayerParams lstm2_layer() const { return lstm_layer(layout_.lstm2_w, layout_.lstm2_b, config_.lstm2_units, config_.lstm1_units); }

  DenseLayerParams dense_layer() const {
    const auto Dn = static_cast<Eigen::Index>(config_.dense_units);
    return {detail::ConstRowMap(params_.data() + layout_.dense_w, Dn, static_cast<Eigen::Index>(config_.lstm2_units)),
            detail::ConstVecMap(params_.data() + layout_.dense_b, Dn), Activation::tanh};
  }

  DenseLayerParams output_layer() const {
    const auto W = static_cast<Eigen::Index>(config_.w_out);
    return {detail::ConstRowMap(params_.data() + layout_.out_w, W, static_cast<Eigen::Index>(config_.flatten_width())),
            detail::ConstVecMap(params_.data() + layout_.out_b, W), Activation::linear};
  }

 private:
  LstmLayerParams lstm_layer(std::size_t w_at, std::size_t b_at, std::size_t units, std::size_t in_dim) const {
    LstmLayerParams lp(units, in_dim);
    const auto U = static_cast<Eigen::Index>(units);
    const auto cols = static_cast<Eigen::Index>(units + in_dim);
    const double* w = params_.data() + w_at;
    const double* b = params_.data() + b_at;
    Matrix* Ws[] = {&lp.W_f, &lp.W_i, &lp.W_c, &lp.W_o};
    Vector* bs[] = {&lp.b_f, &lp.b_i, &lp.b_c, &lp.b_o};
    for (Eigen::Index k = 0; k < 4; ++k) {
      *Ws[k] = detail::ConstRowMap(w + k * U * cols, U, cols);
      *bs[k] = detail::ConstVecMap(b + k * U, U);
    }
    return lp;
  }

  NetworkConfig config_;
  ParameterLayout layout_;
  AlignedBuffer params_;
};

/// Packs equally sized windows into a (len, count) column-per-sample matrix.
template <typename Range>
BatchMatrix pack_columns(const Range& windows, std::size_t len) {
  BatchMatrix m(static_cast<Eigen::Index>(len), static_cast<Eigen::Index>(std::size(windows)));
  Eigen::Index col = 0;
  for (const auto& w : windows) {
    require(std::size(w) == len, "pack_columns: window length mismatch");
    for (std::size_t r = 0; r < len; ++r) m(static_cast<Eigen::Index>(r), col) = w[r];
    ++col;
  }
  return m;
}

}  // namespace surgecorr::nn
