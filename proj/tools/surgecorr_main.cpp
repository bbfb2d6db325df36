#include "surgecorr/cli/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace fs = std::filesystem;
using namespace surgecorr;

int main(int argc, char** argv) {
  CLI::App app{"Storm-surge forecast bias correction: learn modeled-minus-observed offsets and subtract them"};
  app.require_subcommand(1);

  cli::GlobalOptions g;
  std::uint64_t seed = 0;
  std::string data_dir = ".";
  std::string out_dir;
  auto* seed_opt = app.add_option("--seed", seed, "Override the seed (training seed, or mixed into storm seeds)");
  app.add_option("--data-dir", data_dir, "Directory holding manifest.csv and storm CSVs")->capture_default_str();
  app.add_option("--out-dir", out_dir, "Directory for reports and run records");
  app.add_option("--threads", g.threads, "Worker threads for input-window sweeps")->check(CLI::PositiveNumber);
  app.add_flag("-q,--quiet", g.quiet, "Suppress progress output");

  std::string spec_file, gen_out;
  auto* gen = app.add_subcommand("gen-synthetic", "Write a synthetic storm corpus (CSVs, manifest.csv, scenario.cfg)");
  gen->add_option("spec", spec_file, "Storm spec file")->required()->check(CLI::ExistingFile);
  gen->add_option("out", gen_out, "Output directory (defaults to --out-dir)");

  std::string scenario_file, out_model;
  auto* train = app.add_subcommand("train", "Train the offset model for a scenario and append a run record");
  train->add_option("scenario", scenario_file, "Scenario config")->required()->check(CLI::ExistingFile);
  train->add_option("out-model", out_model, "Model file (suffixed _wout<k> when several w_out are configured)")->required();

  std::string model_file, storm, out_csv, overlap = "non-overlapping";
  auto* correct = app.add_subcommand("correct", "Apply a trained model to a storm and write corrected water levels");
  correct->add_option("model", model_file, "SGCW model file")->required()->check(CLI::ExistingFile);
  correct->add_option("storm", storm, "Storm CSV path or storm id from the manifest")->required();
  correct->add_option("out-csv", out_csv, "Output CSV")->required();
  correct->add_option("--overlap", overlap, "non-overlapping | average")->capture_default_str();

  std::string eval_model, eval_storm, eval_out, eval_overlap = "non-overlapping";
  std::vector<std::string> extra_models;
  auto* evaluate = app.add_subcommand("evaluate", "Offset metrics, per-station reports and improvement scatter");
  evaluate->add_option("model", eval_model, "SGCW model file")->required()->check(CLI::ExistingFile);
  evaluate->add_option("storm", eval_storm, "Test storm CSV path or storm id")->required();
  evaluate->add_option("out-report", eval_out, "Report directory")->required();
  evaluate->add_option("--extra-model", extra_models, "Further models (e.g. other prediction windows)")
      ->check(CLI::ExistingFile);
  evaluate->add_option("--overlap", eval_overlap, "non-overlapping | average")->capture_default_str();

  std::vector<std::string> records;
  std::string compare_out;
  double alpha = 0.05;
  auto* compare = app.add_subcommand("compare-scenarios", "Pairwise Wilcoxon tests over run records");
  compare->add_option("records", records, "Run record files (runs/run_<hash>.jsonl)")->required()->expected(2, -1)
      ->check(CLI::ExistingFile);
  compare->add_option("--out", compare_out, "Output directory (defaults to --out-dir)");
  compare->add_option("--alpha", alpha, "Significance level")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*seed_opt) g.seed = seed;
    g.data_dir = data_dir;
    if (!out_dir.empty()) g.out_dir = fs::path(out_dir);

    if (*gen) {
      const fs::path target = !gen_out.empty() ? fs::path(gen_out) : g.out_dir.value_or(fs::path());
      if (target.empty()) throw Error("gen-synthetic: give an output directory");
      cli::cmd_gen_synthetic(spec_file, target, g);
    } else if (*train) {
      cli::cmd_train(scenario_file, out_model, g);
    } else if (*correct) {
      cli::cmd_correct(model_file, storm, out_csv, model::overlap_policy_from_string(overlap), g);
    } else if (*evaluate) {
      std::vector<fs::path> models{eval_model};
      for (const auto& m : extra_models) models.emplace_back(m);
      cli::cmd_evaluate(models, eval_storm, eval_out, g, model::overlap_policy_from_string(eval_overlap));
    } else if (*compare) {
      const fs::path target = !compare_out.empty() ? fs::path(compare_out) : g.out_dir.value_or(fs::path("."));
      std::vector<fs::path> paths(records.begin(), records.end());
      cli::cmd_compare_scenarios(paths, target, g, alpha);
    }
  } catch (const std::exception& e) {
    std::cerr << "surgecorr: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
