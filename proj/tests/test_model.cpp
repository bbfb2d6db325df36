#include "test_support.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace surgecorr;
using namespace surgecorr::model;

namespace {

TrainingConfig quick_training(std::size_t epochs, std::uint64_t seed = 3) {
  TrainingConfig t;
  t.epochs = epochs;
  t.batch_size = 16;
  t.seed = seed;
  return t;
}

TrainedModel small_model(std::uint64_t seed = 1) {
  const auto ds = fixtures::sine_dataset(40, 10, 2, seed);
  return train(ds, fixtures::small_config(10, 2), quick_training(2, seed));
}

}  // namespace

TEST(Train, LearnsSinusoidContinuation) {
  const auto ds = fixtures::sine_dataset(256, 10, 2, 7);
  auto cfg = fixtures::small_config(10, 2);
  cfg.lstm1_units = 8;
  TrainingConfig t = quick_training(60);
  t.lr = 0.01;
  const auto m = train(ds, cfg, t);
  ASSERT_EQ(m.loss_curve.size(), 60u);
  EXPECT_LT(m.loss_curve.back(), m.loss_curve.front());
  EXPECT_LT(m.loss_curve.back(), 1e-3);
}

TEST(Train, ZeroLearningRateLeavesParametersUnchanged) {
  const auto ds = fixtures::sine_dataset(50, 10, 2, 2);
  TrainingConfig t = quick_training(3, 11);
  t.lr = 0.0;
  const auto m = train(ds, fixtures::small_config(), t);
  const auto init = nn::Network::initialize(fixtures::small_config(), 11);
  EXPECT_TRUE(std::equal(init.parameters().begin(), init.parameters().end(), m.network.parameters().begin()));
}

TEST(Train, DeterministicForSameSeed) {
  const auto ds = fixtures::sine_dataset(70, 10, 2, 5);
  const auto a = train(ds, fixtures::small_config(), quick_training(4, 9));
  const auto b = train(ds, fixtures::small_config(), quick_training(4, 9));
  EXPECT_EQ(a.loss_curve, b.loss_curve);
  EXPECT_TRUE(std::equal(a.network.parameters().begin(), a.network.parameters().end(), b.network.parameters().begin()));
  const auto c = train(ds, fixtures::small_config(), quick_training(4, 10));
  EXPECT_NE(a.loss_curve, c.loss_curve);
}

TEST(Train, RejectsBadInputs) {
  const auto ds = fixtures::sine_dataset(10, 10, 2, 5);
  EXPECT_THROW(train(ds, fixtures::small_config(12, 2), quick_training(1)), Error);
  pipeline::WindowedDataset empty{{}, {}, 10, 2};
  EXPECT_THROW(train(empty, fixtures::small_config(), quick_training(1)), Error);
  TrainingConfig bad = quick_training(0);
  EXPECT_THROW(train(ds, fixtures::small_config(), bad), Error);
}

TEST(EpochPermutation, IsAPermutationAndVariesByEpoch) {
  const auto p0 = epoch_permutation(100, 1, 0), p1 = epoch_permutation(100, 1, 1);
  auto sorted = p0;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t k = 0; k < 100; ++k) EXPECT_EQ(sorted[k], k);
  EXPECT_NE(p0, p1);
  EXPECT_EQ(p0, epoch_permutation(100, 1, 0));
}

TEST(Predict, ShapesAndConsistency) {
  const auto m = small_model();
  std::mt19937_64 rng(1);
  const BatchMatrix x = fixtures::random_batch(rng, 10, 1100);
  const BatchMatrix y = predict_batch(m, x, 512);
  ASSERT_EQ(y.rows(), 2);
  ASSERT_EQ(y.cols(), 1100);
  std::vector<double> w(x.col(700).data(), x.col(700).data() + 10);
  const auto single = predict_offsets(m, w);
  ASSERT_EQ(single.size(), 2u);
  EXPECT_NEAR(single[0], y(0, 700), 1e-12);
  EXPECT_THROW(predict_offsets(m, std::vector<double>(9)), ShapeError);
}

TEST(BiasCorrection, Examples) {
  const pipeline::ScalerParams unit{0.0, 1.0};
  EXPECT_EQ(apply_bias_correction(std::vector<double>{5.0}, std::vector<double>{0.5}, unit)[0], 4.5);

  const pipeline::ScalerParams s{-1.0, 3.0};
  const std::vector<double> modeled{2.0, -0.5, 7.25};
  const std::vector<double> zero_offset(3, s.scale(0.0));
  EXPECT_EQ(apply_bias_correction(modeled, zero_offset, s), modeled);

  const std::vector<double> observed{1.5, -0.75, 6.0};
  std::vector<double> perfect(3);
  for (std::size_t k = 0; k < 3; ++k) perfect[k] = s.scale(modeled[k] - observed[k]);
  const auto corrected = apply_bias_correction(modeled, perfect, s);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(corrected[k], observed[k], 1e-12);

  EXPECT_THROW(apply_bias_correction(modeled, std::vector<double>{0.0}, s), ShapeError);
}

TEST(SelectBest, HighestR2AndTieBreak) {
  std::vector<SweepEntry> t(3);
  const std::size_t w[] = {5, 10, 15};
  const double r[] = {0.6, 0.7, 0.65};
  for (std::size_t k = 0; k < 3; ++k) {
    t[k].w_in = w[k];
    t[k].ok = true;
    t[k].test_metrics.r2 = r[k];
  }
  EXPECT_EQ(t[select_best(t)].w_in, 10u);
  t[2].test_metrics.r2 = 0.7;
  t[0].test_metrics.r2 = 0.7;
  EXPECT_EQ(t[select_best(t)].w_in, 5u);
  t[0].ok = false;
  EXPECT_EQ(t[select_best(t)].w_in, 10u);
  for (auto& e : t) e.ok = false;
  EXPECT_THROW(select_best(t), Error);
}

TEST(GridSearch, SingleAndMultiThreadedAgree) {
  const DatasetBuilder build = [](std::size_t w_in) {
    auto tr = fixtures::sine_dataset(40, w_in, 1, 3);
    auto te = fixtures::sine_dataset(20, w_in, 1, 4);
    pipeline::DatasetPair p{std::move(tr), std::move(te), 40 * (w_in + 1)};
    return p;
  };
  const auto a = grid_search_input_window({6, 4, 6}, build, fixtures::small_config(4, 1), quick_training(2), 1);
  const auto b = grid_search_input_window({4, 6}, build, fixtures::small_config(4, 1), quick_training(2), 2);
  ASSERT_EQ(a.table.size(), 2u);
  EXPECT_EQ(a.table[0].w_in, 4u);
  EXPECT_EQ(a.best_w_in, b.best_w_in);
  for (std::size_t k = 0; k < 2; ++k) EXPECT_EQ(a.table[k].r2(), b.table[k].r2());
  ASSERT_TRUE(a.best_model.has_value());
  EXPECT_EQ(a.best_model->config().w_in, a.best_w_in);
}

TEST(ModelFile, RoundTrip) {
  const auto m = small_model(4);
  std::stringstream buf;
  write_model(buf, m);
  const auto back = read_model(buf);
  EXPECT_EQ(back.config(), m.config());
  EXPECT_EQ(back.scaler, m.scaler);
  EXPECT_EQ(back.loss_curve, m.loss_curve);
  EXPECT_TRUE(std::equal(m.network.parameters().begin(), m.network.parameters().end(), back.network.parameters().begin()));
  ASSERT_TRUE(back.adam.has_value());
  EXPECT_EQ(back.adam->t, m.adam->t);
  EXPECT_EQ(back.adam->m, m.adam->m);

  std::stringstream again;
  write_model(again, back);
  std::stringstream first;
  write_model(first, m);
  EXPECT_EQ(again.str(), first.str());
}

TEST(ModelFile, RejectsCorruptInput) {
  std::stringstream bad("XXXXsomething");
  EXPECT_THROW(read_model(bad), Error);

  std::stringstream buf;
  write_model(buf, small_model());
  const std::string bytes = buf.str();
  std::stringstream truncated(bytes.substr(0, bytes.size() / 2));
  EXPECT_THROW(read_model(truncated), Error);
  EXPECT_THROW(load_model("/nonexistent/model.sgcw"), Error);
}

TEST(Scenario, ParsesAndGuardsLeakage) {
  std::istringstream ok(
      "# demo\nname = demo\ntrain_storms = a, b\ntest_storm = c\nw_out = 1,3\nw_in = 6, 12\nepochs = 5\nseed = 7\n");
  const auto c = parse_scenario(ok, "ok");
  EXPECT_EQ(c.train_storms, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(c.w_in_candidates, (std::vector<std::size_t>{6, 12}));
  EXPECT_EQ(c.training.seed, 7u);

  std::istringstream leak("train_storms = a, c\ntest_storm = c\n");
  EXPECT_THROW(parse_scenario(leak, "leak"), LeakageError);
  std::istringstream both("train_storms = a\ntest_storm = c\ntrain_fraction = 0.7\n");
  EXPECT_THROW(parse_scenario(both, "both"), Error);
  std::istringstream unknown("train_storms = a\ntest_storm = c\nbogus = 1\n");
  EXPECT_THROW(parse_scenario(unknown, "unknown"), Error);
}

TEST(RollingCorrection, RowCounts) {
  const auto m = small_model();  // w_in 10, w_out 2
  pipeline::StationSeries s{"st01", "x", {}, {}, {}};
  for (std::size_t t = 0; t < 25; ++t) {
    s.observed.push_back(0.1 * static_cast<double>(t));
    s.modeled.push_back(0.1 * static_cast<double>(t) + 0.3);
  }
  const auto non = rolling_correction(m, s, OverlapPolicy::non_overlapping);
  EXPECT_EQ(non.origins, prediction_origin_count(25, 10, 2));
  EXPECT_EQ(non.origins, 14u);
  EXPECT_EQ(non.size(), (25u - 10u) / 2u * 2u);
  EXPECT_EQ(non.hour.front(), 10u);
  EXPECT_EQ(non.lead[0], 1u);
  EXPECT_EQ(non.lead[1], 2u);
  for (std::size_t k = 0; k < non.size(); ++k)
    EXPECT_DOUBLE_EQ(non.corrected[k], non.modeled[k] - non.predicted_offset[k]);

  const auto avg = rolling_correction(m, s, OverlapPolicy::average);
  EXPECT_EQ(avg.size(), 15u);
  EXPECT_EQ(avg.lead[0], 0u);

  pipeline::StationSeries tiny{"st02", "x", {}, std::vector<double>(11, 1.0), std::vector<double>(11, 1.0)};
  EXPECT_EQ(rolling_correction(m, tiny).size(), 0u);
  EXPECT_THROW(overlap_policy_from_string("sometimes"), Error);
}
