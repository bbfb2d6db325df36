#pragma once

#include "surgecorr/core.hpp"
#include "surgecorr/pipeline/scaler.hpp"
#include "surgecorr/pipeline/series.hpp"

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <tuple>
#include <vector>

namespace surgecorr::pipeline {

/// One (input, target) pair. t_index is the station-series hour of input[0].
struct WindowedSample {
  std::vector<double> input;
  std::vector<double> target;
  std::string station_id;
  std::string storm_id;
  std::size_t t_index = 0;
};

struct WindowedDataset {
  std::vector<WindowedSample> samples;
  ScalerParams scaler;
  std::size_t w_in = 0;
  std::size_t w_out = 0;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

/// max(0, T - w_in - w_out + 1) at stride 1.
inline std::size_t window_count(std::size_t T, std::size_t w_in, std::size_t w_out, std::size_t stride = 1) {
  if (T < w_in + w_out) return 0;
  return (T - w_in - w_out) / stride + 1;
}

/// Slides a (w_in + w_out)-hour window over a gap-free segment.
inline std::vector<WindowedSample> make_windows(const OffsetSeries& segment, std::size_t w_in, std::size_t w_out,
                                                std::size_t stride = 1) {
  if (w_in < 1 || w_out < 1 || stride < 1) throw Error("make_windows: w_in, w_out and stride must be at least 1");
  if (segment.has_gaps()) throw Error("make_windows: segment of station " + segment.station_id + " contains gaps");
  const std::size_t count = window_count(segment.size(), w_in, w_out, stride);
  std::vector<WindowedSample> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t t = k * stride;
    const auto first = segment.values.begin() + static_cast<std::ptrdiff_t>(t);
    WindowedSample s;
    s.input.assign(first, first + static_cast<std::ptrdiff_t>(w_in));
    s.target.assign(first + static_cast<std::ptrdiff_t>(w_in), first + static_cast<std::ptrdiff_t>(w_in + w_out));
    s.station_id = segment.station_id;
    s.storm_id = segment.storm_id;
    s.t_index = segment.origin_hour + t;
    out.push_back(std::move(s));
  }
  return out;
}

inline OffsetSeries scale_segment(const ScalerParams& scaler, const OffsetSeries& seg) {
  OffsetSeries out = seg;
  out.values = scaler.scale(seg.values);
  return out;
}

/// Canonical sample order: (storm_id, station_id, t_index).
inline void sort_samples(std::vector<WindowedSample>& samples) {
  std::stable_sort(samples.begin(), samples.end(), [](const WindowedSample& a, const WindowedSample& b) {
    return std::tie(a.storm_id, a.station_id, a.t_index) < std::tie(b.storm_id, b.station_id, b.t_index);
  });
}

inline WindowedDataset window_segments(std::span<const OffsetSeries> segments, const ScalerParams& scaler,
                                       std::size_t w_in, std::size_t w_out) {
  WindowedDataset ds{{}, scaler, w_in, w_out};
  for (const auto& seg : segments) {
    auto w = make_windows(scale_segment(scaler, seg), w_in, w_out);
    ds.samples.insert(ds.samples.end(), std::make_move_iterator(w.begin()), std::make_move_iterator(w.end()));
  }
  sort_samples(ds.samples);
  return ds;
}

/// Train and test datasets sharing the scaler fitted on the training segments.
struct DatasetPair {
  WindowedDataset train;
  WindowedDataset test;
  std::size_t train_hours = 0;  // hourly offsets available for training
};

/// The only place a scaler is fitted for a scenario: from train_segments
/// alone. test_segments are scaled with that fit and never inspected before.
inline DatasetPair build_datasets(std::span<const OffsetSeries> train_segments,
                                  std::span<const OffsetSeries> test_segments, std::size_t w_in, std::size_t w_out) {
  std::vector<double> pooled;
  for (const auto& seg : train_segments) pooled.insert(pooled.end(), seg.values.begin(), seg.values.end());
  DatasetPair out;
  out.train_hours = pooled.size();
  const ScalerParams scaler = fit_scaler(pooled);
  out.train = window_segments(train_segments, scaler, w_in, w_out);
  out.test = window_segments(test_segments, scaler, w_in, w_out);
  return out;
}

}  // namespace surgecorr::pipeline
