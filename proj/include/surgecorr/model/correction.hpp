#pragma once

#include "surgecorr/core.hpp"
#include "surgecorr/model/trainer.hpp"
#include "surgecorr/pipeline/scaler.hpp"
#include "surgecorr/pipeline/series.hpp"
#include "surgecorr/pipeline/windows.hpp"

#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace surgecorr::model {

/// corrected[t] = modeled[t] - unscale(predicted_offset[t]). With offsets
/// defined as modeled - observed, a perfect offset gives back the observation.
inline std::vector<double> apply_bias_correction(std::span<const double> modeled, std::span<const double> predicted_scaled,
                                                 const pipeline::ScalerParams& scaler) {
  if (modeled.size() != predicted_scaled.size())
    throw ShapeError("apply_bias_correction: " + std::to_string(modeled.size()) + " modeled values vs " +
                     std::to_string(predicted_scaled.size()) + " predicted offsets");
  std::vector<double> out(modeled.size());
  for (std::size_t t = 0; t < modeled.size(); ++t) out[t] = modeled[t] - scaler.unscale(predicted_scaled[t]);
  return out;
}

/// How rolling prediction handles w_out > 1.
enum class OverlapPolicy {
  non_overlapping,  // origins every w_out hours, each hour predicted once
  average,          // origins every hour, overlapping predictions averaged
};

inline OverlapPolicy overlap_policy_from_string(std::string_view s) {
  if (s == "non-overlapping") return OverlapPolicy::non_overlapping;
  if (s == "average") return OverlapPolicy::average;
  throw Error("unknown overlap policy '" + std::string(s) + "' (expected non-overlapping or average)");
}

/// Number of hours at which a full input window precedes a full prediction
/// window inside a gap-free stretch of T hours.
inline std::size_t prediction_origin_count(std::size_t T, std::size_t w_in, std::size_t w_out) {
  return pipeline::window_count(T, w_in, w_out);
}

/// Corrected hours for one station. hour is the index into the station
/// series; lead is 1..w_out for non-overlapping output and 0 for averaged rows.
struct CorrectedSeries {
  std::string station_id;
  std::string storm_id;
  pipeline::TimePoint t0{};
  std::vector<std::size_t> hour;
  std::vector<std::size_t> lead;
  std::vector<double> observed;
  std::vector<double> modeled;
  std::vector<double> predicted_offset;  // feet
  std::vector<double> corrected;
  std::size_t origins = 0;  // valid prediction origins across segments

  std::size_t size() const { return hour.size(); }
};

/// Slides the model through a station series. Inputs are offsets of the
/// preceding w_in hours (gaps up to max_gap filled as in training); each
/// emitted hour gets modeled minus the predicted offset.
inline CorrectedSeries rolling_correction(const TrainedModel& model, const pipeline::StationSeries& station,
                                          OverlapPolicy policy = OverlapPolicy::non_overlapping, std::size_t max_gap = 2) {
  const auto& cfg = model.config();
  const std::size_t w_in = cfg.w_in, w_out = cfg.w_out;
  CorrectedSeries out;
  out.station_id = station.station_id;
  out.storm_id = station.storm_id;
  out.t0 = station.t0;

  const auto segments = pipeline::clean_series(pipeline::extract_offsets(station), max_gap);
  for (const auto& seg : segments) {
    const std::size_t T = seg.size();
    const std::size_t n_origins = prediction_origin_count(T, w_in, w_out);
    if (n_origins == 0) continue;
    out.origins += n_origins;

    std::vector<std::size_t> starts;  // segment index of the first target hour
    const std::size_t step = policy == OverlapPolicy::non_overlapping ? w_out : 1;
    for (std::size_t o = w_in; o + w_out <= T; o += step) starts.push_back(o);

    const std::vector<double> scaled = model.scaler.scale(seg.values);
    BatchMatrix inputs(static_cast<Eigen::Index>(w_in), static_cast<Eigen::Index>(starts.size()));
    for (std::size_t c = 0; c < starts.size(); ++c)
      for (std::size_t r = 0; r < w_in; ++r)
        inputs(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = scaled[starts[c] - w_in + r];
    const BatchMatrix pred = predict_batch(model, inputs);

    auto emit = [&](std::size_t seg_hour, std::size_t lead, double offset_ft) {
      const std::size_t h = seg.origin_hour + seg_hour;
      out.hour.push_back(h);
      out.lead.push_back(lead);
      out.observed.push_back(station.observed[h]);
      out.modeled.push_back(station.modeled[h]);
      out.predicted_offset.push_back(offset_ft);
      out.corrected.push_back(station.modeled[h] - offset_ft);
    };

    if (policy == OverlapPolicy::non_overlapping) {
      for (std::size_t c = 0; c < starts.size(); ++c)
        for (std::size_t k = 0; k < w_out; ++k)
          emit(starts[c] + k, k + 1, model.scaler.unscale(pred(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c))));
    } else {
      std::vector<double> sum(T, 0.0);
      std::vector<std::size_t> hits(T, 0);
      for (std::size_t c = 0; c < starts.size(); ++c)
        for (std::size_t k = 0; k < w_out; ++k) {
          sum[starts[c] + k] += model.scaler.unscale(pred(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)));
          ++hits[starts[c] + k];
        }
      for (std::size_t t = w_in; t < T; ++t)
        if (hits[t]) emit(t, 0, sum[t] / static_cast<double>(hits[t]));
    }
  }
  return out;
}

}  // namespace surgecorr::model
