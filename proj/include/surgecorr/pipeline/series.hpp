#pragma once

#include "surgecorr/core.hpp"
#include "surgecorr/pipeline/timeutil.hpp"

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace surgecorr::pipeline {

/// Hourly observed and modeled water levels (feet) for one gauge in one
/// storm. Missing hours hold NaN.
struct StationSeries {
  std::string station_id;
  std::string storm_id;
  TimePoint t0{};
  std::vector<double> observed;
  std::vector<double> modeled;

  std::size_t size() const { return observed.size(); }
};

/// modeled - observed per hour. origin_hour is the index of values[0] in
/// the station series it came from, so segments keep their provenance.
struct OffsetSeries {
  std::string station_id;
  std::string storm_id;
  TimePoint t0{};
  std::size_t origin_hour = 0;
  std::vector<double> values;
  std::vector<bool> gap_mask;

  std::size_t size() const { return values.size(); }
  bool has_gaps() const {
    for (bool g : gap_mask)
      if (g) return true;
    return false;
  }
};

inline OffsetSeries extract_offsets(const StationSeries& s) {
  if (s.observed.size() != s.modeled.size())
    throw ShapeError("extract_offsets: station " + s.station_id + " has misaligned observed/modeled lengths");
  OffsetSeries out{s.station_id, s.storm_id, s.t0, 0, {}, {}};
  out.values.resize(s.size());
  out.gap_mask.resize(s.size());
  std::size_t overlap = 0;
  for (std::size_t t = 0; t < s.size(); ++t) {
    const double o = s.observed[t], m = s.modeled[t];
    if (std::isfinite(o) && std::isfinite(m)) {
      out.values[t] = m - o;
      out.gap_mask[t] = false;
      ++overlap;
    } else {
      out.values[t] = kMissing;
      out.gap_mask[t] = true;
    }
  }
  if (overlap == 0) throw Error("extract_offsets: station " + s.station_id + " has no overlapping hours");
  return out;
}

/// Linearly fills interior gaps of at most max_gap hours and splits the
/// series at longer ones. Leading and trailing gaps are trimmed. The returned
/// segments are gap-free.
inline std::vector<OffsetSeries> clean_series(const OffsetSeries& in, std::size_t max_gap = 2) {
  std::vector<OffsetSeries> segments;
  const std::size_t n = in.size();
  auto start_segment = [&](std::size_t t) {
    OffsetSeries seg{in.station_id, in.storm_id, in.t0 + Hours(static_cast<long>(t)), in.origin_hour + t, {}, {}};
    segments.push_back(std::move(seg));
  };

  std::size_t t = 0;
  while (t < n && in.gap_mask[t]) ++t;
  if (t == n) return segments;
  start_segment(t);
  while (t < n) {
    if (!in.gap_mask[t]) {
      segments.back().values.push_back(in.values[t]);
      ++t;
      continue;
    }
    std::size_t end = t;
    while (end < n && in.gap_mask[end]) ++end;
    if (end == n) break;
    const std::size_t gap = end - t;
    if (gap <= max_gap) {
      const double left = in.values[t - 1], right = in.values[end];
      for (std::size_t k = 1; k <= gap; ++k)
        segments.back().values.push_back(left + (right - left) * static_cast<double>(k) / static_cast<double>(gap + 1));
    } else {
      start_segment(end);
    }
    t = end;
  }
  for (auto& seg : segments) seg.gap_mask.assign(seg.values.size(), false);
  return segments;
}

/// Earliest floor(fraction * T) hours to the first part, the rest to the second.
inline std::pair<OffsetSeries, OffsetSeries> chronological_split(const OffsetSeries& in, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw Error("chronological_split: train fraction must lie strictly between 0 and 1");
  const auto cut = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(in.size())));
  auto part = [&](std::size_t from, std::size_t to) {
    OffsetSeries p{in.station_id, in.storm_id, in.t0 + Hours(static_cast<long>(from)), in.origin_hour + from, {}, {}};
    p.values.assign(in.values.begin() + static_cast<std::ptrdiff_t>(from), in.values.begin() + static_cast<std::ptrdiff_t>(to));
    p.gap_mask.assign(in.gap_mask.begin() + static_cast<std::ptrdiff_t>(from), in.gap_mask.begin() + static_cast<std::ptrdiff_t>(to));
    return p;
  };
  return {part(0, cut), part(cut, in.size())};
}

}  // namespace surgecorr::pipeline
