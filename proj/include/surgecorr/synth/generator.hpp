#pragma once

// Synthetic gauge series with a learnable model bias:
//
//   observed[t] = A_s sin(2 pi t / P + phi_s) + S_s exp(-(t - c_s)^2 / (2 w^2)) + obs noise
//   e[t]        = rho e[t-1] + eta[t],  e[-1] = 0
//   bias[t]     = gain * observed[t] + e[t]
//   modeled[t]  = observed[t] + bias[t]
//
// Per-station amplitude, phase, surge scale and surge timing are drawn from a
// stream keyed by (seed, station index), so every station is reproducible on
// its own.

#include "surgecorr/config_text.hpp"
#include "surgecorr/core.hpp"
#include "surgecorr/pipeline/csv_io.hpp"
#include "surgecorr/pipeline/series.hpp"
#include "surgecorr/pipeline/timeutil.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace surgecorr::synth {

enum class StormRole { train, test };

struct SyntheticStormSpec {
  std::string storm_id = "synthetic";
  std::string name = "Synthetic";
  int year = 2000;
  std::string category = "1";
  StormRole role = StormRole::train;
  std::string start = "2000-01-01T00:00:00Z";
  std::size_t n_stations = 20;
  std::size_t duration_hours = 150;
  double tide_amplitude_ft = 2.0;
  double tide_period_hours = 12.42;
  double surge_peak_ft = 4.0;
  double surge_center_hour = 75.0;
  double surge_width_hours = 10.0;
  double bias_gain = 0.1;
  double bias_ar_coeff = 0.95;
  double bias_noise_std_ft = 0.05;
  double obs_noise_std_ft = 0.02;
  std::uint64_t seed = 1;

  void validate() const {
    if (storm_id.empty() || storm_id.find_first_of(",/\\ ") != std::string::npos)
      throw Error("synthetic storm: storm_id must be non-empty without commas, slashes or spaces");
    if (duration_hours < 48) throw Error("synthetic storm " + storm_id + ": duration too short (need >= 48 h)");
    if (n_stations < 1) throw Error("synthetic storm " + storm_id + ": n_stations must be at least 1");
    if (!(bias_ar_coeff >= 0.0 && bias_ar_coeff < 1.0))
      throw Error("synthetic storm " + storm_id + ": bias_ar_coeff must lie in [0, 1)");
    if (!(tide_period_hours > 0.0) || !(surge_width_hours > 0.0))
      throw Error("synthetic storm " + storm_id + ": tide period and surge width must be positive");
    if (!(bias_noise_std_ft >= 0.0) || !(obs_noise_std_ft >= 0.0))
      throw Error("synthetic storm " + storm_id + ": noise levels must be non-negative");
    (void)pipeline::parse_utc(start);
  }
};

/// Standard normal via Box-Muller on the library's own uniform draw.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : rng_(seed) {}
  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do u1 = unit_uniform(rng_()); while (u1 <= 0.0);
    const double u2 = unit_uniform(rng_());
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }
  double uniform() { return unit_uniform(rng_()); }

 private:
  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline std::string station_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "st%02zu", index + 1);
  return buf;
}

/// Series for one station, plus the bias process that produced it.
struct GeneratedStation {
  pipeline::StationSeries series;
  std::vector<double> bias;
};

inline GeneratedStation generate_station(const SyntheticStormSpec& spec, std::size_t station_index) {
  spec.validate();
  if (station_index >= spec.n_stations) throw Error("synthetic storm: station index out of range");
  NormalStream draw(mix_seed(spec.seed, station_index + 1));
  const double amp = spec.tide_amplitude_ft * (0.8 + 0.4 * draw.uniform());
  const double phase = 2.0 * std::numbers::pi * draw.uniform();
  const double surge = spec.surge_peak_ft * (0.6 + 0.8 * draw.uniform());
  const double center = spec.surge_center_hour + 12.0 * (draw.uniform() - 0.5);

  GeneratedStation g;
  auto& s = g.series;
  s.station_id = station_name(station_index);
  s.storm_id = spec.storm_id;
  s.t0 = pipeline::parse_utc(spec.start);
  const std::size_t T = spec.duration_hours;
  s.observed.resize(T);
  s.modeled.resize(T);
  g.bias.resize(T);
  double e = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    const double th = static_cast<double>(t);
    const double z = (th - center) / spec.surge_width_hours;
    const double obs_noise = draw();
    const double eta = draw();
    const double obs = amp * std::sin(2.0 * std::numbers::pi * th / spec.tide_period_hours + phase) +
                       surge * std::exp(-0.5 * z * z) + spec.obs_noise_std_ft * obs_noise;
    e = spec.bias_ar_coeff * e + spec.bias_noise_std_ft * eta;
    const double bias = spec.bias_gain * obs + e;
    s.observed[t] = obs;
    s.modeled[t] = obs + bias;
    g.bias[t] = bias;
  }
  return g;
}

inline pipeline::StationSeries generate_station_series(const SyntheticStormSpec& spec, std::size_t station_index) {
  return generate_station(spec, station_index).series;
}

inline pipeline::StormData generate_storm(const SyntheticStormSpec& spec) {
  pipeline::StormData storm{spec.storm_id, {}};
  for (std::size_t k = 0; k < spec.n_stations; ++k) storm.stations.push_back(generate_station_series(spec, k));
  return storm;
}

/// Reads "[storm]" sections; keys before the first section are defaults for
/// every storm.
inline std::vector<SyntheticStormSpec> parse_storm_specs(std::istream& in, const std::string& context) {
  const auto sections = parse_key_values(in, context);
  auto apply = [&](SyntheticStormSpec& sp, const KeyValueSection& sec) {
    for (const auto& [key, value] : sec.values) {
      const std::string what = context + ":" + std::to_string(sec.lines.at(key)) + ": " + key;
      auto num = [&] { return parse_number(value, what); };
      auto count = [&] { return static_cast<std::size_t>(parse_unsigned(value, what)); };
      if (key == "storm_id") sp.storm_id = value;
      else if (key == "name") sp.name = value;
      else if (key == "year") sp.year = static_cast<int>(parse_unsigned(value, what));
      else if (key == "category") sp.category = value;
      else if (key == "role") {
        if (value == "train") sp.role = StormRole::train;
        else if (value == "test") sp.role = StormRole::test;
        else throw Error(what + ": role must be train or test");
      } else if (key == "start") sp.start = value;
      else if (key == "n_stations") sp.n_stations = count();
      else if (key == "duration_hours") sp.duration_hours = count();
      else if (key == "tide_amplitude_ft") sp.tide_amplitude_ft = num();
      else if (key == "tide_period_hours") sp.tide_period_hours = num();
      else if (key == "surge_peak_ft") sp.surge_peak_ft = num();
      else if (key == "surge_center_hour") sp.surge_center_hour = num();
      else if (key == "surge_width_hours") sp.surge_width_hours = num();
      else if (key == "bias_gain") sp.bias_gain = num();
      else if (key == "bias_ar_coeff") sp.bias_ar_coeff = num();
      else if (key == "bias_noise_std_ft") sp.bias_noise_std_ft = num();
      else if (key == "obs_noise_std_ft") sp.obs_noise_std_ft = num();
      else if (key == "seed") sp.seed = parse_unsigned(value, what);
      else throw Error(what + ": unknown key");
    }
  };
  SyntheticStormSpec defaults;
  apply(defaults, sections.front());
  std::vector<SyntheticStormSpec> specs;
  for (std::size_t k = 1; k < sections.size(); ++k) {
    if (sections[k].name != "storm") throw Error(context + ": unknown section [" + sections[k].name + "]");
    SyntheticStormSpec sp = defaults;
    apply(sp, sections[k]);
    specs.push_back(sp);
  }
  return specs;
}

inline std::vector<SyntheticStormSpec> read_storm_specs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open storm spec file " + path.string());
  return parse_storm_specs(in, path.string());
}

struct CorpusFiles {
  std::filesystem::path manifest;
  std::filesystem::path scenario;
  std::vector<std::filesystem::path> storms;
};

/// Validates the storm list: unique ids and seeds, at least one training
/// storm and exactly one test storm.
inline void validate_corpus(const std::vector<SyntheticStormSpec>& specs) {
  if (specs.size() < 2) throw Error("synthetic corpus: need at least 2 storms (training and test)");
  std::set<std::string> ids;
  std::set<std::uint64_t> seeds;
  std::size_t tests = 0;
  for (const auto& sp : specs) {
    sp.validate();
    if (!ids.insert(sp.storm_id).second) throw Error("synthetic corpus: duplicate storm_id '" + sp.storm_id + "'");
    if (!seeds.insert(sp.seed).second) throw Error("synthetic corpus: storms must use distinct seeds");
    if (sp.role == StormRole::test) ++tests;
  }
  if (tests != 1) throw Error("synthetic corpus: exactly one storm must have role = test");
  if (specs.size() - tests < 1) throw Error("synthetic corpus: need at least one training storm");
}

/// Writes one storm CSV per spec, manifest.csv and a matching scenario.cfg.
inline CorpusFiles generate_scenario_corpus(const std::vector<SyntheticStormSpec>& specs,
                                            const std::filesystem::path& out_dir) {
  validate_corpus(specs);
  std::filesystem::create_directories(out_dir);
  CorpusFiles files;
  std::vector<pipeline::ManifestEntry> entries;
  std::string train_list, test_id;
  for (const auto& sp : specs) {
    const std::string file = sp.storm_id + ".csv";
    const auto path = out_dir / file;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    pipeline::write_storm_csv(out, generate_storm(sp));
    if (!out) throw Error("write failed for " + path.string());
    files.storms.push_back(path);
    entries.push_back({sp.storm_id, sp.name, sp.year, sp.category, file});
    if (sp.role == StormRole::test) test_id = sp.storm_id;
    else train_list += (train_list.empty() ? "" : ",") + sp.storm_id;
  }
  files.manifest = out_dir / "manifest.csv";
  {
    std::ofstream out(files.manifest, std::ios::binary);
    pipeline::write_manifest(out, entries);
    if (!out) throw Error("write failed for " + files.manifest.string());
  }
  files.scenario = out_dir / "scenario.cfg";
  {
    std::ofstream out(files.scenario, std::ios::binary);
    out << "# generated alongside the synthetic corpus\n"
        << "name = synthetic\n"
        << "train_storms = " << train_list << "\n"
        << "test_storm = " << test_id << "\n";
    if (!out) throw Error("write failed for " + files.scenario.string());
  }
  return files;
}

}  // namespace surgecorr::synth
