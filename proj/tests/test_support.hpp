#pragma once

// Helpers shared by the test binaries. The reference forward pass here
// composes the single-sample layer functions and is kept separate from the
// batched implementation it is compared against.

#include "surgecorr/surgecorr.hpp"

#include <random>
#include <vector>

namespace surgecorr::fixtures {

inline Vector reference_forward(const nn::Network& net, const std::vector<double>& window) {
  const auto& c = net.config();
  Matrix input(static_cast<Eigen::Index>(c.w_in), 1);
  for (std::size_t k = 0; k < c.w_in; ++k) input(static_cast<Eigen::Index>(k), 0) = window[k];
  const Matrix conv = nn::conv1d_forward(net.conv_layer(), input);
  const Matrix h1 = nn::lstm_layer_forward(net.lstm1_layer(), conv);
  const Matrix h2 = nn::lstm_layer_forward(net.lstm2_layer(), h1);
  const auto dense = net.dense_layer();
  Vector flat(static_cast<Eigen::Index>(c.flatten_width()));
  for (Eigen::Index t = 0; t < h2.rows(); ++t)
    flat.segment(t * static_cast<Eigen::Index>(c.dense_units), static_cast<Eigen::Index>(c.dense_units)) =
        nn::dense_forward(dense, h2.row(t).transpose());
  return nn::dense_forward(net.output_layer(), flat);
}

inline BatchMatrix random_batch(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double lo = 0.0, double hi = 1.0) {
  BatchMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = lo + (hi - lo) * unit_uniform(rng());
  return m;
}

inline nn::NetworkConfig small_config(std::size_t w_in = 10, std::size_t w_out = 2) {
  nn::NetworkConfig c;
  c.w_in = w_in;
  c.w_out = w_out;
  c.conv_filters = 2;
  c.conv_kernel = 3;
  c.lstm1_units = 4;
  c.lstm2_units = 8;
  c.dense_units = 4;
  return c;
}

/// Learnable offset-like dataset: targets continue a noisy sinusoid.
inline pipeline::WindowedDataset sine_dataset(std::size_t n, std::size_t w_in, std::size_t w_out, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  pipeline::WindowedDataset ds{{}, {0.0, 1.0}, w_in, w_out};
  for (std::size_t k = 0; k < n; ++k) {
    const double phase = 6.283185307179586 * unit_uniform(rng());
    pipeline::WindowedSample s;
    for (std::size_t t = 0; t < w_in + w_out; ++t) {
      const double v = 0.5 + 0.4 * std::sin(phase + 0.5 * static_cast<double>(t));
      (t < w_in ? s.input : s.target).push_back(v);
    }
    s.station_id = "st";
    s.storm_id = "sine";
    s.t_index = k;
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

}  // namespace surgecorr::fixtures
