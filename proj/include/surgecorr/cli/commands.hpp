#pragma once

// Command implementations behind the surgecorr executable. Every command
// throws surgecorr::Error (or a std::exception) on failure; the executable
// turns that into a one-line diagnostic and a nonzero exit code.

#include "surgecorr/config_text.hpp"
#include "surgecorr/core.hpp"
#include "surgecorr/eval/report.hpp"
#include "surgecorr/eval/wilcoxon.hpp"
#include "surgecorr/model/correction.hpp"
#include "surgecorr/model/grid_search.hpp"
#include "surgecorr/model/model_file.hpp"
#include "surgecorr/model/scenario.hpp"
#include "surgecorr/pipeline/csv_io.hpp"
#include "surgecorr/synth/generator.hpp"

#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

namespace surgecorr::cli {

namespace fs = std::filesystem;
using nlohmann::json;

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  fs::path data_dir = ".";
  std::optional<fs::path> out_dir;
  std::size_t threads = 1;
  std::ostream* log = &std::cerr;
  bool quiet = false;
};

inline std::ostream& log(const GlobalOptions& g) {
  static std::ostream null_stream(nullptr);
  return g.quiet ? null_stream : *g.log;
}

inline std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  return out.empty() ? "scenario" : out;
}

inline std::ofstream open_output(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + p.string());
  return out;
}

// ---------------------------------------------------------------- gen-synthetic

inline synth::CorpusFiles cmd_gen_synthetic(const fs::path& spec_file, const fs::path& out_dir, const GlobalOptions& g) {
  auto specs = synth::read_storm_specs(spec_file);
  if (g.seed)
    for (auto& sp : specs) sp.seed = mix_seed(*g.seed, sp.seed);
  auto files = synth::generate_scenario_corpus(specs, out_dir);
  log(g) << "wrote " << files.storms.size() << " storms and " << files.manifest.string() << "\n";
  return files;
}

// ---------------------------------------------------------------- train

/// Model path for one prediction window: the path itself when the scenario
/// has a single w_out, otherwise <stem>_wout<k><ext> beside it.
inline fs::path model_path_for(const fs::path& out_model, std::size_t w_out, std::size_t n_wout) {
  if (n_wout == 1) return out_model;
  const std::string ext = out_model.has_extension() ? out_model.extension().string() : ".sgcw";
  return out_model.parent_path() / (out_model.stem().string() + "_wout" + std::to_string(w_out) + ext);
}

struct TrainOutcome {
  std::string config_hash;
  std::size_t train_hours = 0;
  std::map<std::size_t, model::SweepResult> sweeps;  // keyed by w_out (best_model retained)
  std::vector<fs::path> model_files;
  fs::path sweep_csv;
  fs::path run_record;
  json record;
};

inline fs::path run_record_path(const fs::path& out_dir, const std::string& hash) {
  return out_dir / "runs" / ("run_" + hash + ".jsonl");
}

/// Appends one JSON line; earlier runs in the same file are left untouched.
inline std::size_t append_run_record(const fs::path& path, json record) {
  fs::create_directories(path.parent_path());
  std::size_t previous = 0;
  {
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line))
      if (!trim(line).empty()) ++previous;
  }
  record["run_index"] = previous;
  std::ofstream out(path, std::ios::app | std::ios::binary);
  if (!out) throw Error("cannot append run record " + path.string());
  out << record.dump() << '\n';
  return previous;
}

inline TrainOutcome cmd_train(const fs::path& scenario_file, const fs::path& out_model, const GlobalOptions& g) {
  const auto wall_start = std::chrono::steady_clock::now();
  model::ScenarioConfig cfg = model::read_scenario(scenario_file);
  if (g.seed) cfg.training.seed = *g.seed;
  cfg.validate();
  const auto manifest = pipeline::read_manifest(g.data_dir / "manifest.csv");
  const auto data = model::load_scenario_data(cfg, manifest);

  TrainOutcome outcome;
  outcome.config_hash = model::scenario_hash(cfg, manifest);
  outcome.train_hours = data.train_hours();
  const fs::path out_dir = g.out_dir ? *g.out_dir : (out_model.has_parent_path() ? out_model.parent_path() : fs::path("."));
  log(g) << "scenario '" << cfg.name << "': " << data.train_segments.size() << " training segments, "
         << outcome.train_hours << " hourly offsets for training\n";

  json entries = json::array();
  json selected = json::object();
  for (std::size_t w_out : cfg.w_out_list) {
    auto builder = [&](std::size_t w_in) {
      auto pair = pipeline::build_datasets(data.train_segments, data.test_segments, w_in, w_out);
      if (pair.train.empty()) throw Error("no training windows for w_in=" + std::to_string(w_in));
      if (pair.test.empty()) throw Error("no test windows for w_in=" + std::to_string(w_in));
      return pair;
    };
    auto sweep = model::grid_search_input_window(
        cfg.w_in_candidates, builder, cfg.network, cfg.training, g.threads, [&](const model::SweepEntry& e) {
          if (e.ok)
            log(g) << "  w_out=" << w_out << " w_in=" << e.w_in << " test R2=" << eval::fmt(e.r2(), 4) << " ("
                   << eval::fmt(e.train_seconds, 1) << " s)\n";
          else
            log(g) << "  w_out=" << w_out << " w_in=" << e.w_in << " failed: " << e.error << "\n";
        });
    const fs::path path = model_path_for(out_model, w_out, cfg.w_out_list.size());
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    model::save_model(path, *sweep.best_model);
    outcome.model_files.push_back(path);
    for (const auto& e : sweep.table) {
      json row = {{"w_out", w_out}, {"w_in", e.w_in}, {"ok", e.ok}, {"train_seconds", e.train_seconds},
                  {"train_samples", e.train_samples}, {"test_samples", e.test_samples},
                  {"selected", e.w_in == sweep.best_w_in}};
      if (e.ok) {
        row["r2"] = e.test_metrics.r2;
        row["mse"] = e.test_metrics.mse;
        row["rmse"] = e.test_metrics.rmse;
        row["mae"] = e.test_metrics.mae;
      } else {
        row["error"] = e.error;
      }
      entries.push_back(row);
    }
    selected[std::to_string(w_out)] = {{"w_in", sweep.best_w_in}, {"model", path.string()}};
    outcome.sweeps.emplace(w_out, std::move(sweep));
  }

  outcome.sweep_csv = out_dir / (sanitize(cfg.name) + "_sweep.csv");
  {
    auto out = open_output(outcome.sweep_csv);
    out << "w_out,w_in,r2,mse,rmse,mae,train_seconds,train_samples,test_samples,selected\n";
    for (const auto& [w_out, sweep] : outcome.sweeps)
      for (const auto& e : sweep.table) {
        out << w_out << ',' << e.w_in << ',';
        if (e.ok)
          out << eval::fmt(e.test_metrics.r2) << ',' << eval::fmt(e.test_metrics.mse) << ','
              << eval::fmt(e.test_metrics.rmse) << ',' << eval::fmt(e.test_metrics.mae);
        else
          out << ",,,";
        out << ',' << eval::fmt(e.train_seconds, 3) << ',' << e.train_samples << ',' << e.test_samples << ','
            << (e.w_in == sweep.best_w_in ? 1 : 0) << '\n';
      }
  }

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  json outputs = json::array();
  for (const auto& p : outcome.model_files) outputs.push_back(p.string());
  outputs.push_back(outcome.sweep_csv.string());
  outcome.record = {{"scenario", cfg.name},
                    {"config_hash", outcome.config_hash},
                    {"seed", cfg.training.seed},
                    {"train_storms", cfg.train_storms},
                    {"test_storm", cfg.test_storm},
                    {"train_hours", outcome.train_hours},
                    {"epochs", cfg.training.epochs},
                    {"batch_size", cfg.training.batch_size},
                    {"lr", cfg.training.lr},
                    {"entries", entries},
                    {"selected", selected},
                    {"selection_note", "w_in chosen by test-set R2; sweep table reported alongside"},
                    {"wall_seconds", wall},
                    {"outputs", outputs}};
  outcome.run_record = run_record_path(out_dir, outcome.config_hash);
  append_run_record(outcome.run_record, outcome.record);
  log(g) << "run record appended to " << outcome.run_record.string() << "\n";
  return outcome;
}

// ---------------------------------------------------------------- correct / evaluate

/// A storm argument is either a CSV path or a storm id in the data-dir manifest.
inline pipeline::StormData resolve_storm(const std::string& storm, const GlobalOptions& g) {
  if (fs::is_regular_file(storm)) return pipeline::read_storm_csv(fs::path(storm), fs::path(storm).stem().string());
  const fs::path manifest_path = g.data_dir / "manifest.csv";
  if (!fs::exists(manifest_path)) throw Error("storm '" + storm + "' is neither a file nor listed in a manifest");
  return pipeline::read_manifest(manifest_path).load(storm);
}

inline constexpr const char* kCorrectedHeader =
    "station_id,timestamp,lead_h,observed_ft,modeled_ft,predicted_offset_ft,corrected_ft";

inline void write_corrected_csv(std::ostream& out, const std::vector<model::CorrectedSeries>& series) {
  auto num = [&](double v) {
    if (!is_missing(v)) out << pipeline::format_double(v);
  };
  out << kCorrectedHeader << '\n';
  for (const auto& s : series)
    for (std::size_t k = 0; k < s.size(); ++k) {
      out << s.station_id << ',' << pipeline::format_utc(s.t0 + pipeline::Hours(static_cast<long>(s.hour[k]))) << ','
          << s.lead[k] << ',';
      num(s.observed[k]);
      out << ',';
      num(s.modeled[k]);
      out << ',';
      num(s.predicted_offset[k]);
      out << ',';
      num(s.corrected[k]);
      out << '\n';
    }
}

inline std::vector<model::CorrectedSeries> correct_storm(const model::TrainedModel& m, const pipeline::StormData& storm,
                                                         model::OverlapPolicy policy) {
  std::vector<model::CorrectedSeries> out;
  for (const auto& st : storm.stations) {
    auto cs = model::rolling_correction(m, st, policy);
    if (cs.size()) out.push_back(std::move(cs));
  }
  if (out.empty())
    throw Error("storm " + storm.storm_id + " is shorter than w_in + w_out (" + std::to_string(m.config().w_in) + " + " +
                std::to_string(m.config().w_out) + " h) at every station");
  return out;
}

inline std::vector<model::CorrectedSeries> cmd_correct(const fs::path& model_file, const std::string& storm,
                                                       const fs::path& out_csv, model::OverlapPolicy policy,
                                                       const GlobalOptions& g) {
  const auto m = model::load_model(model_file);
  const auto data = resolve_storm(storm, g);
  auto series = correct_storm(m, data, policy);
  auto out = open_output(out_csv);
  write_corrected_csv(out, series);
  std::size_t rows = 0;
  for (const auto& s : series) rows += s.size();
  log(g) << "wrote " << rows << " corrected hours for " << series.size() << " stations to " << out_csv.string() << "\n";
  return series;
}

struct EvaluationReport {
  std::vector<eval::MetricsReport> offset_metrics;  // one per model
  std::vector<std::size_t> w_out;
  std::vector<std::size_t> w_in;
  std::vector<std::vector<eval::StationReport>> stations;  // per model
  std::vector<eval::ImprovementScatter> scatter;           // per model
};

/// Offset metrics, per-station water-level reports and the improvement
/// scatter for each model on one storm.
inline EvaluationReport evaluate_storm(const std::vector<model::TrainedModel>& models, const pipeline::StormData& storm,
                                       model::OverlapPolicy policy = model::OverlapPolicy::non_overlapping,
                                       std::size_t max_gap = 2) {
  EvaluationReport rep;
  std::vector<pipeline::OffsetSeries> segments;
  for (const auto& st : storm.stations) model::append_clean(segments, pipeline::extract_offsets(st), max_gap);
  for (const auto& m : models) {
    const auto& c = m.config();
    const auto test = pipeline::window_segments(segments, m.scaler, c.w_in, c.w_out);
    if (test.empty()) throw Error("storm " + storm.storm_id + " yields no windows for w_in=" + std::to_string(c.w_in));
    rep.offset_metrics.push_back(model::evaluate_offsets(m, test, "w_out=" + std::to_string(c.w_out)));
    rep.w_out.push_back(c.w_out);
    rep.w_in.push_back(c.w_in);
    std::vector<eval::StationReport> reports;
    for (const auto& cs : correct_storm(m, storm, policy))
      reports.push_back(eval::station_report(cs.station_id, c.w_out, cs.observed, cs.modeled, cs.corrected));
    rep.scatter.push_back(eval::improvement_scatter(reports));
    rep.stations.push_back(std::move(reports));
  }
  return rep;
}

inline EvaluationReport cmd_evaluate(const std::vector<fs::path>& model_files, const std::string& storm,
                                     const fs::path& out_dir, const GlobalOptions& g,
                                     model::OverlapPolicy policy = model::OverlapPolicy::non_overlapping) {
  if (model_files.empty()) throw Error("evaluate: no model files");
  std::vector<model::TrainedModel> models;
  for (const auto& p : model_files) models.push_back(model::load_model(p));
  const auto data = resolve_storm(storm, g);
  const auto rep = evaluate_storm(models, data, policy);

  fs::create_directories(out_dir);
  {
    auto out = open_output(out_dir / "offset_metrics.csv");
    out << "w_out,w_in,n,r2,mse,rmse,mae\n";
    for (std::size_t k = 0; k < models.size(); ++k) {
      const auto& m = rep.offset_metrics[k];
      out << rep.w_out[k] << ',' << rep.w_in[k] << ',' << m.n << ',' << eval::fmt(m.r2) << ',' << eval::fmt(m.mse) << ','
          << eval::fmt(m.rmse) << ',' << eval::fmt(m.mae) << '\n';
    }
  }
  {
    auto out = open_output(out_dir / "station_report.csv");
    std::vector<eval::StationReport> all;
    for (const auto& s : rep.stations) all.insert(all.end(), s.begin(), s.end());
    eval::write_station_reports_csv(out, all);
  }
  for (std::size_t k = 0; k < models.size(); ++k) {
    auto out = open_output(out_dir / ("scatter_wout" + std::to_string(rep.w_out[k]) + ".csv"));
    eval::write_scatter_csv(out, rep.scatter[k]);
  }
  {
    auto out = open_output(out_dir / "summary.txt");
    out << "Storm " << data.storm_id << "\n\nOffset prediction (feet)\n  w_out  w_in      R2       MSE      RMSE       MAE\n";
    for (std::size_t k = 0; k < models.size(); ++k) {
      const auto& m = rep.offset_metrics[k];
      char line[128];
      std::snprintf(line, sizeof line, "  %5zu %5zu  %6.3f  %8.4f  %8.4f  %8.4f\n", rep.w_out[k], rep.w_in[k], m.r2, m.mse,
                    m.rmse, m.mae);
      out << line;
    }
    out << "\nWater levels (corrected = modeled - predicted offset)\n";
    for (std::size_t k = 0; k < models.size(); ++k) {
      eval::write_station_summary(out, rep.stations[k]);
      out << "  stations improved: " << eval::fmt(100.0 * rep.scatter[k].fraction_improved, 1) << " %\n\n";
    }
    out << "Note: when a model was picked by an input-window sweep scored on this storm, these figures are not\n"
           "an independent test; see the sweep table in the run record.\n";
  }
  log(g) << "evaluation written to " << out_dir.string() << "\n";
  return rep;
}

// ---------------------------------------------------------------- compare-scenarios

/// Test R2 per (w_out, w_in) from the most recent run in a record file.
struct ScenarioR2 {
  std::string scenario;
  std::map<std::size_t, std::map<std::size_t, double>> r2;  // w_out -> w_in -> R2
};

inline ScenarioR2 read_run_record(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open run record " + path.string());
  std::string line, last;
  while (std::getline(in, line))
    if (!trim(line).empty()) last = line;
  if (last.empty()) throw Error("run record " + path.string() + " is empty");
  const json rec = json::parse(last);
  ScenarioR2 s;
  s.scenario = rec.at("scenario").get<std::string>();
  for (const auto& e : rec.at("entries"))
    if (e.value("ok", false)) s.r2[e.at("w_out").get<std::size_t>()][e.at("w_in").get<std::size_t>()] = e.at("r2").get<double>();
  return s;
}

struct ComparisonRow {
  std::string scenario_a, scenario_b;
  std::size_t w_out = 0;
  bool degenerate = false;
  eval::WilcoxonResult result;
};

/// Pairwise Wilcoxon signed-rank over the R2-vs-w_in distributions for every
/// w_out present in both scenarios. The w_in grids must match.
inline std::vector<ComparisonRow> compare_scenarios(const std::vector<ScenarioR2>& runs) {
  if (runs.size() < 2) throw Error("compare-scenarios: need at least two run records");
  std::vector<ComparisonRow> rows;
  for (std::size_t a = 0; a < runs.size(); ++a)
    for (std::size_t b = a + 1; b < runs.size(); ++b)
      for (const auto& [w_out, grid_a] : runs[a].r2) {
        const auto it = runs[b].r2.find(w_out);
        if (it == runs[b].r2.end()) continue;
        const auto& grid_b = it->second;
        std::vector<double> xa, xb;
        for (const auto& [w_in, r] : grid_a) {
          const auto jt = grid_b.find(w_in);
          if (jt == grid_b.end())
            throw Error("compare-scenarios: w_in grids differ between '" + runs[a].scenario + "' and '" + runs[b].scenario +
                        "' at w_out=" + std::to_string(w_out));
          xa.push_back(r);
          xb.push_back(jt->second);
        }
        if (grid_b.size() != grid_a.size())
          throw Error("compare-scenarios: w_in grids differ between '" + runs[a].scenario + "' and '" + runs[b].scenario +
                      "' at w_out=" + std::to_string(w_out));
        ComparisonRow row{runs[a].scenario, runs[b].scenario, w_out, false, {}};
        try {
          row.result = eval::wilcoxon_signed_rank(xa, xb);
        } catch (const eval::DegenerateTestError&) {
          row.degenerate = true;
        }
        rows.push_back(row);
      }
  if (rows.empty()) throw Error("compare-scenarios: the run records share no prediction window");
  return rows;
}

inline std::vector<ComparisonRow> cmd_compare_scenarios(const std::vector<fs::path>& records, const fs::path& out_dir,
                                                        const GlobalOptions& g, double alpha = 0.05) {
  std::vector<ScenarioR2> runs;
  for (const auto& p : records) runs.push_back(read_run_record(p));
  const auto rows = compare_scenarios(runs);

  fs::create_directories(out_dir);
  {
    auto out = open_output(out_dir / "wilcoxon.csv");
    out << "scenario_a,scenario_b,w_out,n_effective,statistic,p_value,method,significant\n";
    for (const auto& r : rows) {
      out << r.scenario_a << ',' << r.scenario_b << ',' << r.w_out << ',';
      if (r.degenerate)
        out << "0,,,degenerate,0\n";
      else
        out << r.result.n_effective << ',' << eval::fmt(r.result.statistic, 1) << ',' << eval::fmt(r.result.p_value, 6) << ','
            << eval::to_string(r.result.method) << ',' << (eval::significantly_different(r.result, alpha) ? 1 : 0) << '\n';
    }
  }
  {
    auto out = open_output(out_dir / "r2_distribution.csv");
    out << "scenario,w_out,w_in,r2\n";
    for (const auto& s : runs)
      for (const auto& [w_out, grid] : s.r2)
        for (const auto& [w_in, r] : grid) out << s.scenario << ',' << w_out << ',' << w_in << ',' << eval::fmt(r) << '\n';
  }
  {
    auto out = open_output(out_dir / "wilcoxon.txt");
    for (const auto& r : rows) {
      char line[200];
      if (r.degenerate)
        std::snprintf(line, sizeof line, "%s vs %s  w_out=%zu  degenerate (all differences zero)\n", r.scenario_a.c_str(),
                      r.scenario_b.c_str(), r.w_out);
      else
        std::snprintf(line, sizeof line, "%s vs %s  w_out=%zu  statistic=%g  p=%s  -> %s\n", r.scenario_a.c_str(),
                      r.scenario_b.c_str(), r.w_out, r.result.statistic,
                      r.result.p_value < 0.001 ? "<0.001" : eval::fmt(r.result.p_value, 3).c_str(),
                      eval::significantly_different(r.result, alpha) ? "significantly different"
                                                                     : "not significantly different");
      out << line;
    }
  }
  log(g) << "compared " << runs.size() << " scenarios (" << rows.size() << " rows) into " << out_dir.string() << "\n";
  return rows;
}

}  // namespace surgecorr::cli
