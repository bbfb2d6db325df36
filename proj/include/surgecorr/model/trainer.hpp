#pragma once

#include "surgecorr/core.hpp"
#include "surgecorr/eval/metrics.hpp"
#include "surgecorr/nn/adam.hpp"
#include "surgecorr/nn/network.hpp"
#include "surgecorr/pipeline/windows.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace surgecorr::model {

using nn::NetworkConfig;

struct TrainingConfig {
  std::size_t epochs = 200;
  std::size_t batch_size = 32;
  double lr = 0.001;
  std::uint64_t seed = 0;

  void validate() const {
    if (epochs < 1) throw Error("training config: epochs must be at least 1");
    if (batch_size < 1) throw Error("training config: batch_size must be at least 1");
    if (!(lr >= 0.0) || !std::isfinite(lr)) throw Error("training config: learning rate must be finite and >= 0");
  }
};

struct TrainedModel {
  nn::Network network;
  pipeline::ScalerParams scaler;
  std::vector<double> loss_curve;  // mean training MSE per epoch (scaled units)
  std::optional<nn::AdamState> adam;

  const NetworkConfig& config() const { return network.config(); }
};

/// Deterministic epoch permutation of [0, n).
inline std::vector<std::size_t> epoch_permutation(std::size_t n, std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(mix_seed(mix_seed(seed, 0x5348554646ULL), epoch));
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng() % i);
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

inline BatchMatrix pack_inputs(const pipeline::WindowedDataset& ds) {
  BatchMatrix m(static_cast<Eigen::Index>(ds.w_in), static_cast<Eigen::Index>(ds.size()));
  for (std::size_t c = 0; c < ds.size(); ++c)
    for (std::size_t r = 0; r < ds.w_in; ++r) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = ds.samples[c].input[r];
  return m;
}

inline BatchMatrix pack_targets(const pipeline::WindowedDataset& ds) {
  BatchMatrix m(static_cast<Eigen::Index>(ds.w_out), static_cast<Eigen::Index>(ds.size()));
  for (std::size_t c = 0; c < ds.size(); ++c)
    for (std::size_t r = 0; r < ds.w_out; ++r) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = ds.samples[c].target[r];
  return m;
}

using EpochCallback = std::function<void(std::size_t epoch, double loss)>;

/// Minibatch Adam on the MSE of the target windows. The network is
/// initialized from train_cfg.seed; batches follow epoch_permutation and the
/// last short batch is kept.
inline TrainedModel train(const pipeline::WindowedDataset& dataset, NetworkConfig net_cfg, const TrainingConfig& train_cfg,
                          const EpochCallback& on_epoch = {}) {
  train_cfg.validate();
  if (dataset.empty()) throw Error("train: empty dataset");
  if (net_cfg.w_in != dataset.w_in || net_cfg.w_out != dataset.w_out)
    throw Error("train: network windows (" + std::to_string(net_cfg.w_in) + "," + std::to_string(net_cfg.w_out) +
                ") do not match dataset windows (" + std::to_string(dataset.w_in) + "," + std::to_string(dataset.w_out) + ")");

  nn::Network net = nn::Network::initialize(net_cfg, train_cfg.seed);
  nn::AdamState adam = nn::AdamState::for_parameters(net.parameter_count(), train_cfg.lr);

  const BatchMatrix X = pack_inputs(dataset);
  const BatchMatrix Y = pack_targets(dataset);
  const std::size_t n = dataset.size();
  const std::size_t bs = train_cfg.batch_size;

  std::vector<double> grad(net.parameter_count());
  nn::ForwardCache cache;
  BatchMatrix xb, yb;
  std::vector<double> curve;
  curve.reserve(train_cfg.epochs);

  for (std::size_t epoch = 0; epoch < train_cfg.epochs; ++epoch) {
    const auto perm = epoch_permutation(n, train_cfg.seed, epoch);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += bs) {
      const std::size_t count = std::min(bs, n - start);
      xb.resize(X.rows(), static_cast<Eigen::Index>(count));
      yb.resize(Y.rows(), static_cast<Eigen::Index>(count));
      for (std::size_t k = 0; k < count; ++k) {
        xb.col(static_cast<Eigen::Index>(k)) = X.col(static_cast<Eigen::Index>(perm[start + k]));
        yb.col(static_cast<Eigen::Index>(k)) = Y.col(static_cast<Eigen::Index>(perm[start + k]));
      }
      net.forward(xb, cache);
      const double loss = net.backward(cache, yb, grad);
      if (!std::isfinite(loss))
        throw NonFiniteError("train: non-finite loss at epoch " + std::to_string(epoch + 1) + ", batch starting at " +
                             std::to_string(start));
      loss_sum += loss * static_cast<double>(count);
      nn::adam_update(adam, net.mutable_parameters(), grad);
    }
    const double epoch_loss = loss_sum / static_cast<double>(n);
    curve.push_back(epoch_loss);
    if (on_epoch) on_epoch(epoch + 1, epoch_loss);
  }
  return TrainedModel{std::move(net), dataset.scaler, std::move(curve), std::move(adam)};
}

/// Scaled offsets for every column of inputs (w_in, B); returns (w_out, B).
inline BatchMatrix predict_batch(const TrainedModel& model, const BatchMatrix& inputs, std::size_t chunk = 512) {
  BatchMatrix out(static_cast<Eigen::Index>(model.config().w_out), inputs.cols());
  for (Eigen::Index start = 0; start < inputs.cols(); start += static_cast<Eigen::Index>(chunk)) {
    const Eigen::Index count = std::min<Eigen::Index>(static_cast<Eigen::Index>(chunk), inputs.cols() - start);
    out.middleCols(start, count) = model.network.forward(inputs.middleCols(start, count));
  }
  return out;
}

inline std::vector<double> predict_offsets(const TrainedModel& model, std::span<const double> input_window) {
  const auto& cfg = model.config();
  if (input_window.size() != cfg.w_in)
    throw ShapeError("predict_offsets: input window has " + std::to_string(input_window.size()) + " values, model expects " +
                     std::to_string(cfg.w_in));
  BatchMatrix x(static_cast<Eigen::Index>(cfg.w_in), 1);
  for (std::size_t k = 0; k < cfg.w_in; ++k) x(static_cast<Eigen::Index>(k), 0) = input_window[k];
  const BatchMatrix y = model.network.forward(x);
  return {y.data(), y.data() + y.size()};
}

/// Offset-space metrics in feet over every (window, lead) target value.
inline eval::MetricsReport evaluate_offsets(const TrainedModel& model, const pipeline::WindowedDataset& test,
                                            std::string label = "offsets") {
  if (test.empty()) throw Error("evaluate_offsets: empty test dataset");
  if (test.w_in != model.config().w_in || test.w_out != model.config().w_out)
    throw Error("evaluate_offsets: dataset windows do not match the model");
  const BatchMatrix pred = predict_batch(model, pack_inputs(test));
  const BatchMatrix truth = pack_targets(test);
  std::vector<double> y(static_cast<std::size_t>(truth.size())), y_hat(y.size());
  for (Eigen::Index k = 0; k < truth.size(); ++k) {
    y[static_cast<std::size_t>(k)] = test.scaler.unscale(truth.data()[k]);
    y_hat[static_cast<std::size_t>(k)] = model.scaler.unscale(pred.data()[k]);
  }
  return eval::compute_metrics(y, y_hat, std::move(label));
}

}  // namespace surgecorr::model
