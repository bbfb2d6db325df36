#pragma once

// Storm CSV:     station_id,timestamp,observed_ft,modeled_ft
// Manifest CSV:  storm_id,name,year,category,path
// Timestamps are UTC ISO-8601 on the hour; an empty level field is missing.
// Manifest paths are relative to the manifest's directory.

#include "surgecorr/core.hpp"
#include "surgecorr/pipeline/series.hpp"
#include "surgecorr/pipeline/timeutil.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace surgecorr::pipeline {

inline constexpr std::string_view kStormHeader = "station_id,timestamp,observed_ft,modeled_ft";
inline constexpr std::string_view kManifestHeader = "storm_id,name,year,category,path";

/// Shortest decimal that round-trips to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw Error("format_double failed");
  return std::string(buf, end);
}

inline double parse_double(std::string_view s, const std::string& context) {
  double v = 0.0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size())
    throw Error(context + ": cannot parse number '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

inline std::string_view trim_cr(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  return s;
}

struct StormData {
  std::string storm_id;
  std::vector<StationSeries> stations;  // sorted by station_id

  std::size_t total_hours() const {
    std::size_t n = 0;
    for (const auto& s : stations) n += s.size();
    return n;
  }
};

inline StormData read_storm_csv(std::istream& in, const std::string& storm_id, const std::string& context = "storm csv") {
  std::string line;
  if (!std::getline(in, line) || trim_cr(line) != kStormHeader)
    throw Error(context + ": expected header '" + std::string(kStormHeader) + "'");

  struct Row {
    TimePoint t;
    double obs, mod;
  };
  std::map<std::string, std::vector<Row>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim_cr(line);
    if (text.empty()) continue;
    const auto f = split_csv_line(text);
    const std::string where = context + ":" + std::to_string(line_no);
    if (f.size() != 4) throw Error(where + ": expected 4 fields, got " + std::to_string(f.size()));
    if (f[0].empty()) throw Error(where + ": empty station_id");
    auto level = [&](std::string_view s) { return s.empty() ? kMissing : parse_double(s, where); };
    rows[std::string(f[0])].push_back({parse_utc(f[1]), level(f[2]), level(f[3])});
  }

  StormData storm{storm_id, {}};
  for (auto& [station, rs] : rows) {
    StationSeries s{station, storm_id, rs.front().t, {}, {}};
    for (std::size_t k = 0; k < rs.size(); ++k) {
      const auto offset = rs[k].t - s.t0;
      if (k > 0 && rs[k].t <= rs[k - 1].t)
        throw Error(context + ": timestamps of station " + station + " are not strictly increasing");
      if (offset % std::chrono::hours(1) != std::chrono::seconds(0))
        throw Error(context + ": station " + station + " has a timestamp off the hourly grid");
      const auto hour = static_cast<std::size_t>(std::chrono::duration_cast<Hours>(offset).count());
      s.observed.resize(hour, kMissing);
      s.modeled.resize(hour, kMissing);
      s.observed.push_back(rs[k].obs);
      s.modeled.push_back(rs[k].mod);
    }
    storm.stations.push_back(std::move(s));
  }
  return storm;
}

inline StormData read_storm_csv(const std::filesystem::path& path, const std::string& storm_id) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open storm csv " + path.string());
  return read_storm_csv(in, storm_id, path.string());
}

inline void write_storm_csv(std::ostream& out, const StormData& storm) {
  out << kStormHeader << '\n';
  for (const auto& s : storm.stations) {
    for (std::size_t t = 0; t < s.size(); ++t) {
      out << s.station_id << ',' << format_utc(s.t0 + Hours(static_cast<long>(t))) << ',';
      if (!is_missing(s.observed[t])) out << format_double(s.observed[t]);
      out << ',';
      if (!is_missing(s.modeled[t])) out << format_double(s.modeled[t]);
      out << '\n';
    }
  }
}

struct ManifestEntry {
  std::string storm_id;
  std::string name;
  int year = 0;
  std::string category;
  std::string path;  // as written, relative to the manifest directory
};

struct Manifest {
  std::filesystem::path directory;
  std::vector<ManifestEntry> storms;

  const ManifestEntry* find(std::string_view id) const {
    for (const auto& e : storms)
      if (e.storm_id == id) return &e;
    return nullptr;
  }

  std::filesystem::path resolve(std::string_view id) const {
    const auto* e = find(id);
    if (!e) throw Error("manifest has no storm '" + std::string(id) + "'");
    return directory / e->path;
  }

  StormData load(std::string_view id) const { return read_storm_csv(resolve(id), std::string(id)); }
};

inline Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest " + path.string());
  std::string line;
  if (!std::getline(in, line) || trim_cr(line) != kManifestHeader)
    throw Error(path.string() + ": expected header '" + std::string(kManifestHeader) + "'");
  Manifest m{path.parent_path(), {}};
  while (std::getline(in, line)) {
    const auto text = trim_cr(line);
    if (text.empty()) continue;
    const auto f = split_csv_line(text);
    if (f.size() != 5) throw Error(path.string() + ": manifest rows need 5 fields");
    ManifestEntry e{std::string(f[0]), std::string(f[1]), 0, std::string(f[3]), std::string(f[4])};
    if (!f[2].empty()) e.year = static_cast<int>(parse_double(f[2], path.string()));
    if (m.find(e.storm_id)) throw Error(path.string() + ": duplicate storm id '" + e.storm_id + "'");
    m.storms.push_back(std::move(e));
  }
  return m;
}

inline void write_manifest(std::ostream& out, const std::vector<ManifestEntry>& entries) {
  out << kManifestHeader << '\n';
  for (const auto& e : entries)
    out << e.storm_id << ',' << e.name << ',' << e.year << ',' << e.category << ',' << e.path << '\n';
}

}  // namespace surgecorr::pipeline
