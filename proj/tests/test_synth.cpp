#include "test_support.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace surgecorr;
using namespace surgecorr::synth;

namespace {

std::string slurp(const std::filesystem::path& p) { return model::read_file_bytes(p); }

std::vector<SyntheticStormSpec> corpus_specs(std::size_t n_train) {
  std::vector<SyntheticStormSpec> specs;
  for (std::size_t k = 0; k <= n_train; ++k) {
    SyntheticStormSpec sp;
    sp.storm_id = "s" + std::to_string(k);
    sp.seed = 100 + k;
    sp.n_stations = 3;
    sp.duration_hours = 60;
    sp.role = k == n_train ? StormRole::test : StormRole::train;
    specs.push_back(sp);
  }
  return specs;
}

}  // namespace

TEST(Synthetic, NullBiasGivesZeroOffsets) {
  SyntheticStormSpec sp;
  sp.bias_gain = 0.0;
  sp.bias_noise_std_ft = 0.0;
  for (const auto& s : generate_storm(sp).stations) {
    const auto off = pipeline::extract_offsets(s);
    for (double v : off.values) EXPECT_EQ(v, 0.0);
  }
}

TEST(Synthetic, DeterministicGainOnly) {
  SyntheticStormSpec sp;
  sp.bias_noise_std_ft = 0.0;
  const auto s = generate_station_series(sp, 4);
  const auto off = pipeline::extract_offsets(s);
  for (std::size_t t = 0; t < s.size(); ++t) EXPECT_NEAR(off.values[t], 0.1 * s.observed[t], 1e-12);
}

TEST(Synthetic, SameSeedSameSeries) {
  SyntheticStormSpec sp;
  const auto a = generate_storm(sp), b = generate_storm(sp);
  ASSERT_EQ(a.stations.size(), 20u);
  for (std::size_t k = 0; k < a.stations.size(); ++k) {
    EXPECT_EQ(a.stations[k].observed, b.stations[k].observed);
    EXPECT_EQ(a.stations[k].modeled, b.stations[k].modeled);
  }
  sp.seed = 2;
  EXPECT_NE(generate_storm(sp).stations[0].observed, a.stations[0].observed);
  EXPECT_NE(a.stations[0].observed, a.stations[1].observed);
}

TEST(Synthetic, ExtractRecoversInjectedBias) {
  SyntheticStormSpec sp;
  const auto g = generate_station(sp, 0);
  const auto off = pipeline::extract_offsets(g.series);
  for (std::size_t t = 0; t < g.bias.size(); ++t) EXPECT_NEAR(off.values[t], g.bias[t], 1e-12);
}

TEST(Synthetic, BiasIsAutocorrelated) {
  SyntheticStormSpec sp;
  sp.bias_gain = 0.0;
  sp.bias_ar_coeff = 0.95;
  sp.duration_hours = 20000;
  sp.n_stations = 1;
  const auto e = generate_station(sp, 0).bias;
  double mean = 0;
  for (double v : e) mean += v;
  mean /= static_cast<double>(e.size());
  double num = 0, den = 0;
  for (std::size_t t = 0; t < e.size(); ++t) {
    den += (e[t] - mean) * (e[t] - mean);
    if (t) num += (e[t] - mean) * (e[t - 1] - mean);
  }
  EXPECT_GT(num / den, 0.9);
}

TEST(Synthetic, SpecValidation) {
  SyntheticStormSpec sp;
  sp.duration_hours = 47;
  try {
    sp.validate();
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("duration too short"), std::string::npos);
  }
  sp.duration_hours = 48;
  EXPECT_NO_THROW(sp.validate());
  sp.bias_ar_coeff = 1.0;
  EXPECT_THROW(sp.validate(), Error);
}

TEST(Synthetic, ParseSpecsWithDefaults) {
  std::istringstream in(
      "n_stations = 4\nduration_hours = 72\n"
      "[storm]\nstorm_id = a\nseed = 5\n"
      "[storm]\nstorm_id = b\nseed = 6\nrole = test\nn_stations = 2\n");
  const auto specs = parse_storm_specs(in, "spec");
  ASSERT_EQ(specs.size(), 2u);
  EXPECT_EQ(specs[0].n_stations, 4u);
  EXPECT_EQ(specs[1].n_stations, 2u);
  EXPECT_EQ(specs[1].duration_hours, 72u);
  EXPECT_EQ(specs[1].role, StormRole::test);
  std::istringstream bad("[storm]\nstorm_id = a\nwobble = 1\n");
  EXPECT_THROW(parse_storm_specs(bad, "bad"), Error);
}

TEST(Synthetic, CorpusValidation) {
  auto specs = corpus_specs(2);
  EXPECT_NO_THROW(validate_corpus(specs));
  specs[1].seed = specs[0].seed;
  EXPECT_THROW(validate_corpus(specs), Error);
  specs = corpus_specs(2);
  specs[0].role = StormRole::test;
  EXPECT_THROW(validate_corpus(specs), Error);
  EXPECT_THROW(validate_corpus({corpus_specs(1)[1]}), Error);
}

TEST(Synthetic, CorpusShapesAndByteIdenticalRegeneration) {
  const auto root = std::filesystem::temp_directory_path() / "surgecorr_synth_test";
  std::filesystem::remove_all(root);
  for (std::size_t n_train : {6u, 1u}) {
    const auto specs = corpus_specs(n_train);
    const auto a = generate_scenario_corpus(specs, root / "a");
    const auto b = generate_scenario_corpus(specs, root / "b");
    ASSERT_EQ(a.storms.size(), n_train + 1);
    for (std::size_t k = 0; k < a.storms.size(); ++k) EXPECT_EQ(slurp(a.storms[k]), slurp(b.storms[k]));
    EXPECT_EQ(slurp(a.manifest), slurp(b.manifest));

    const auto manifest = pipeline::read_manifest(a.manifest);
    EXPECT_EQ(manifest.storms.size(), n_train + 1);
    const auto scenario = model::read_scenario(a.scenario);
    EXPECT_EQ(scenario.train_storms.size(), n_train);
    EXPECT_EQ(scenario.test_storm, "s" + std::to_string(n_train));
    const auto storm = manifest.load("s0");
    ASSERT_EQ(storm.stations.size(), 3u);
    EXPECT_EQ(storm.stations[0].size(), 60u);
    // CSV round trip reproduces the generated values exactly.
    EXPECT_EQ(storm.stations[1].observed, generate_station_series(specs[0], 1).observed);
    std::filesystem::remove_all(root);
  }
}
