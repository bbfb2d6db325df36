#pragma once

#include "surgecorr/core.hpp"
#include "surgecorr/eval/metrics.hpp"
#include "surgecorr/model/trainer.hpp"
#include "surgecorr/pipeline/windows.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace surgecorr::model {

struct SweepEntry {
  std::size_t w_in = 0;
  bool ok = false;
  std::string error;
  eval::MetricsReport test_metrics;  // offset space, feet
  double train_seconds = 0.0;
  std::size_t train_samples = 0;
  std::size_t test_samples = 0;
  std::size_t train_hours = 0;

  double r2() const { return test_metrics.r2; }
};

struct SweepResult {
  std::size_t best_w_in = 0;
  std::size_t best_index = 0;
  std::vector<SweepEntry> table;  // ascending w_in
  std::optional<TrainedModel> best_model;
};

/// Index of the highest test R2 among successful entries; ties go to the
/// smaller w_in. Entries must be sorted by ascending w_in.
inline std::size_t select_best(std::span<const SweepEntry> table) {
  std::optional<std::size_t> best;
  for (std::size_t k = 0; k < table.size(); ++k) {
    if (!table[k].ok) continue;
    if (!best || table[k].r2() > table[*best].r2()) best = k;
  }
  if (!best) throw Error("input-window sweep: every candidate failed");
  return *best;
}

using DatasetBuilder = std::function<pipeline::DatasetPair(std::size_t w_in)>;
using CandidateCallback = std::function<void(const SweepEntry&)>;

/// Trains one model per input window and scores each on its test set.
/// Candidates may run on up to `threads` workers; each model is trained
/// single-threaded from the same seed, so results do not depend on the
/// worker count.
inline SweepResult grid_search_input_window(std::vector<std::size_t> candidates, const DatasetBuilder& build,
                                            const NetworkConfig& net_template, const TrainingConfig& train_cfg,
                                            std::size_t threads = 1, const CandidateCallback& on_done = {}) {
  if (candidates.empty()) throw Error("input-window sweep: no candidates");
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  const std::size_t n = candidates.size();
  std::vector<SweepEntry> table(n);
  std::vector<std::optional<TrainedModel>> models(n);

  auto run_one = [&](std::size_t k) {
    SweepEntry& e = table[k];
    e.w_in = candidates[k];
    try {
      const auto data = build(e.w_in);
      e.train_samples = data.train.size();
      e.test_samples = data.test.size();
      e.train_hours = data.train_hours;
      NetworkConfig cfg = net_template;
      cfg.w_in = e.w_in;
      cfg.w_out = data.train.w_out;
      const auto start = std::chrono::steady_clock::now();
      TrainedModel m = train(data.train, cfg, train_cfg);
      e.train_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      e.test_metrics = evaluate_offsets(m, data.test, "w_in=" + std::to_string(e.w_in));
      e.ok = true;
      models[k] = std::move(m);
    } catch (const std::exception& ex) {
      e.ok = false;
      e.error = ex.what();
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, n));
  if (workers == 1) {
    for (std::size_t k = 0; k < n; ++k) {
      run_one(k);
      if (on_done) on_done(table[k]);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < n; k = next++) run_one(k);
      });
    for (auto& t : pool) t.join();
    if (on_done)
      for (const auto& e : table) on_done(e);
  }

  SweepResult result;
  result.best_index = select_best(table);
  result.best_w_in = table[result.best_index].w_in;
  result.best_model = std::move(models[result.best_index]);
  result.table = std::move(table);
  return result;
}

}  // namespace surgecorr::model
