#pragma once

#include "surgecorr/core.hpp"
#include "surgecorr/eval/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace surgecorr::eval {

/// Metrics of the raw model and of the corrected model against observations.
struct StationReport {
  std::string station_id;
  std::size_t w_out = 0;
  MetricsReport without_ml;
  MetricsReport with_ml;

  bool improved() const { return with_ml.r2 > without_ml.r2; }
};

/// Hours with a missing observation are skipped.
inline StationReport station_report(const std::string& station_id, std::size_t w_out, std::span<const double> observed,
                                    std::span<const double> modeled, std::span<const double> corrected) {
  if (observed.size() != modeled.size() || observed.size() != corrected.size())
    throw ShapeError("station_report: series for station " + station_id + " are not aligned");
  std::vector<double> obs, mod, cor;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    if (!std::isfinite(observed[k]) || !std::isfinite(modeled[k]) || !std::isfinite(corrected[k])) continue;
    obs.push_back(observed[k]);
    mod.push_back(modeled[k]);
    cor.push_back(corrected[k]);
  }
  StationReport r;
  r.station_id = station_id;
  r.w_out = w_out;
  r.without_ml = compute_metrics(obs, mod, "without ML");
  r.with_ml = compute_metrics(obs, cor, "with ML");
  return r;
}

struct ScatterPoint {
  std::string station_id;
  double r2_without = 0.0;
  double r2_with = 0.0;
};

struct ImprovementScatter {
  std::vector<ScatterPoint> points;
  double fraction_improved = 0.0;  // share of points strictly above x = y
};

inline ImprovementScatter improvement_scatter(std::span<const StationReport> reports) {
  ImprovementScatter s;
  std::size_t above = 0;
  for (const auto& r : reports) {
    s.points.push_back({r.station_id, r.without_ml.r2, r.with_ml.r2});
    if (r.improved()) ++above;
  }
  s.fraction_improved = s.points.empty() ? 0.0 : static_cast<double>(above) / static_cast<double>(s.points.size());
  return s;
}

inline std::string fmt(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline constexpr const char* kStationReportHeader =
    "station_id,w_out,n,r2_without,r2_with,mse_without,mse_with,rmse_without,rmse_with,mae_without,mae_with,improved";

inline void write_station_reports_csv(std::ostream& out, std::span<const StationReport> reports) {
  out << kStationReportHeader << '\n';
  for (const auto& r : reports) {
    out << r.station_id << ',' << r.w_out << ',' << r.with_ml.n << ',' << fmt(r.without_ml.r2) << ','
        << fmt(r.with_ml.r2) << ',' << fmt(r.without_ml.mse) << ',' << fmt(r.with_ml.mse) << ','
        << fmt(r.without_ml.rmse) << ',' << fmt(r.with_ml.rmse) << ',' << fmt(r.without_ml.mae) << ','
        << fmt(r.with_ml.mae) << ',' << (r.improved() ? 1 : 0) << '\n';
  }
}

inline void write_scatter_csv(std::ostream& out, const ImprovementScatter& s) {
  out << "station_id,r2_without,r2_with\n";
  for (const auto& p : s.points) out << p.station_id << ',' << fmt(p.r2_without) << ',' << fmt(p.r2_with) << '\n';
}

/// Per-station "without / with" table for one prediction window.
inline void write_station_summary(std::ostream& out, std::span<const StationReport> reports) {
  if (reports.empty()) return;
  out << "Prediction window " << reports.front().w_out << " h\n";
  out << "  station                 R2 (without / with ML)   RMSE ft (without / with ML)\n";
  for (const auto& r : reports) {
    char line[160];
    std::snprintf(line, sizeof line, "  %-22s  %6.3f / %6.3f          %6.3f / %6.3f%s\n", r.station_id.c_str(),
                  r.without_ml.r2, r.with_ml.r2, r.without_ml.rmse, r.with_ml.rmse, r.improved() ? "" : "  (no gain)");
    out << line;
  }
}

}  // namespace surgecorr::eval
