#pragma once

// Scenario config, e.g.
//
//   name = 6 different
//   train_storms = sandy, matthew, harvey, michael, florence, ida
//   test_storm = ian
//   w_out = 1, 3, 6, 9, 12, 15, 18
//   w_in = 6, 9, 12, 15, 18, 21, 24
//   epochs = 200
//   batch_size = 32
//   lr = 0.001
//   seed = 42
//
// Instead of test_storm, train_fraction = 0.75 holds out the chronologically
// last quarter of every training station. Optional network keys:
// conv_filters, conv_kernel, lstm1_units, lstm2_units, dense_units; and
// max_gap (hours of interpolated gap, default 2).

#include "surgecorr/config_text.hpp"
#include "surgecorr/core.hpp"
#include "surgecorr/model/trainer.hpp"
#include "surgecorr/pipeline/csv_io.hpp"
#include "surgecorr/pipeline/series.hpp"
#include "surgecorr/pipeline/windows.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace surgecorr::model {

/// Test-set information would reach training.
class LeakageError : public Error {
 public:
  using Error::Error;
};

struct ScenarioConfig {
  std::string name = "scenario";
  std::vector<std::string> train_storms;
  std::string test_storm;
  std::optional<double> train_fraction;
  std::vector<std::size_t> w_out_list{1, 3, 6, 9, 12, 15, 18};
  std::vector<std::size_t> w_in_candidates{15};
  TrainingConfig training;
  NetworkConfig network;
  std::size_t max_gap = 2;

  void validate() const {
    if (train_storms.empty()) throw Error("scenario " + name + ": no training storms");
    if (test_storm.empty() && !train_fraction) throw Error("scenario " + name + ": set test_storm or train_fraction");
    if (!test_storm.empty() && train_fraction)
      throw Error("scenario " + name + ": test_storm and train_fraction are mutually exclusive");
    if (!test_storm.empty() && std::find(train_storms.begin(), train_storms.end(), test_storm) != train_storms.end())
      throw LeakageError("scenario " + name + ": test storm '" + test_storm + "' is listed among the training storms");
    if (w_out_list.empty() || w_in_candidates.empty()) throw Error("scenario " + name + ": empty w_out or w_in list");
    for (auto w : w_out_list)
      if (w < 1) throw Error("scenario " + name + ": w_out values must be >= 1");
    for (auto w : w_in_candidates)
      if (w < network.conv_kernel) throw Error("scenario " + name + ": w_in candidates must be >= the conv kernel");
    training.validate();
  }

  /// Stable textual form; hashed together with the data to key run records.
  std::string canonical_text() const {
    std::ostringstream s;
    auto list = [&](const auto& v) {
      for (std::size_t k = 0; k < v.size(); ++k) s << (k ? "," : "") << v[k];
    };
    s << "name=" << name << "\ntrain_storms=";
    list(train_storms);
    s << "\ntest_storm=" << test_storm << "\ntrain_fraction=";
    if (train_fraction) s << *train_fraction;
    s << "\nw_out=";
    list(w_out_list);
    s << "\nw_in=";
    list(w_in_candidates);
    s << "\nepochs=" << training.epochs << "\nbatch_size=" << training.batch_size << "\nlr=" << training.lr
      << "\nseed=" << training.seed << "\nconv_filters=" << network.conv_filters << "\nconv_kernel=" << network.conv_kernel
      << "\nlstm1_units=" << network.lstm1_units << "\nlstm2_units=" << network.lstm2_units
      << "\ndense_units=" << network.dense_units << "\nmax_gap=" << max_gap << "\n";
    return s.str();
  }
};

inline ScenarioConfig parse_scenario(std::istream& in, const std::string& context) {
  const auto sections = parse_key_values(in, context);
  if (sections.size() != 1) throw Error(context + ": scenario files take no [sections]");
  ScenarioConfig c;
  for (const auto& [key, value] : sections.front().values) {
    const std::string what = context + ":" + std::to_string(sections.front().lines.at(key)) + ": " + key;
    auto count = [&] { return static_cast<std::size_t>(parse_unsigned(value, what)); };
    auto counts = [&] {
      std::vector<std::size_t> v;
      for (const auto& item : split_list(value)) v.push_back(static_cast<std::size_t>(parse_unsigned(item, what)));
      return v;
    };
    if (key == "name") c.name = value;
    else if (key == "train_storms") c.train_storms = split_list(value);
    else if (key == "test_storm") c.test_storm = value;
    else if (key == "train_fraction") c.train_fraction = parse_number(value, what);
    else if (key == "w_out") c.w_out_list = counts();
    else if (key == "w_in") c.w_in_candidates = counts();
    else if (key == "epochs") c.training.epochs = count();
    else if (key == "batch_size") c.training.batch_size = count();
    else if (key == "lr") c.training.lr = parse_number(value, what);
    else if (key == "seed") c.training.seed = parse_unsigned(value, what);
    else if (key == "conv_filters") c.network.conv_filters = count();
    else if (key == "conv_kernel") c.network.conv_kernel = count();
    else if (key == "lstm1_units") c.network.lstm1_units = count();
    else if (key == "lstm2_units") c.network.lstm2_units = count();
    else if (key == "dense_units") c.network.dense_units = count();
    else if (key == "max_gap") c.max_gap = count();
    else throw Error(what + ": unknown key");
  }
  c.validate();
  return c;
}

inline ScenarioConfig read_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open scenario config " + path.string());
  return parse_scenario(in, path.string());
}

/// Cleaned offset segments on each side of the train/test boundary.
struct ScenarioData {
  std::vector<pipeline::OffsetSeries> train_segments;
  std::vector<pipeline::OffsetSeries> test_segments;

  std::size_t train_hours() const {
    std::size_t n = 0;
    for (const auto& s : train_segments) n += s.size();
    return n;
  }
};

inline void append_clean(std::vector<pipeline::OffsetSeries>& out, const pipeline::OffsetSeries& offsets, std::size_t max_gap) {
  auto segs = pipeline::clean_series(offsets, max_gap);
  out.insert(out.end(), std::make_move_iterator(segs.begin()), std::make_move_iterator(segs.end()));
}

/// Loads the storms a scenario names. In held-out mode the test storm is read
/// into test_segments only; in fraction mode every station is cut
/// chronologically before cleaning, so no segment spans the cut.
inline ScenarioData load_scenario_data(const ScenarioConfig& cfg, const pipeline::Manifest& manifest) {
  cfg.validate();
  ScenarioData data;
  for (const auto& id : cfg.train_storms) {
    const auto storm = manifest.load(id);
    for (const auto& st : storm.stations) {
      const auto offsets = pipeline::extract_offsets(st);
      if (cfg.train_fraction) {
        const auto [head, tail] = pipeline::chronological_split(offsets, *cfg.train_fraction);
        append_clean(data.train_segments, head, cfg.max_gap);
        append_clean(data.test_segments, tail, cfg.max_gap);
      } else {
        append_clean(data.train_segments, offsets, cfg.max_gap);
      }
    }
  }
  if (!cfg.test_storm.empty()) {
    const auto storm = manifest.load(cfg.test_storm);
    for (const auto& st : storm.stations) append_clean(data.test_segments, pipeline::extract_offsets(st), cfg.max_gap);
  }
  return data;
}

inline std::string read_file_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// FNV-1a over the canonical config and the bytes of every storm it names.
inline std::string scenario_hash(const ScenarioConfig& cfg, const pipeline::Manifest& manifest) {
  std::uint64_t h = fnv1a(cfg.canonical_text());
  std::vector<std::string> ids = cfg.train_storms;
  if (!cfg.test_storm.empty()) ids.push_back(cfg.test_storm);
  for (const auto& id : ids) {
    h = fnv1a(id, h);
    h = fnv1a(read_file_bytes(manifest.resolve(id)), h);
  }
  return hex64(h);
}

}  // namespace surgecorr::model
