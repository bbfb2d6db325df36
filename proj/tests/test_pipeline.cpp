#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace surgecorr;
using namespace surgecorr::pipeline;

namespace {

StationSeries station(std::vector<double> obs, std::vector<double> mod, std::string id = "st01") {
  return {std::move(id), "storm", parse_utc("2020-01-01T00:00:00Z"), std::move(obs), std::move(mod)};
}

OffsetSeries gap_free(std::vector<double> v, std::string id = "st01", std::size_t origin = 0) {
  OffsetSeries s{std::move(id), "storm", {}, origin, std::move(v), {}};
  s.gap_mask.assign(s.values.size(), false);
  return s;
}

}  // namespace

TEST(ExtractOffsets, Examples) {
  const auto a = extract_offsets(station({1.0, 2.0, 3.0}, {1.5, 2.0, 2.0}));
  EXPECT_EQ(a.values, (std::vector<double>{0.5, 0.0, -1.0}));
  EXPECT_FALSE(a.has_gaps());

  const double nan = kMissing;
  const auto b = extract_offsets(station({1.0, nan, 3.0}, {1.0, 2.0, 4.0}));
  EXPECT_EQ(b.values[0], 0.0);
  EXPECT_TRUE(std::isnan(b.values[1]));
  EXPECT_EQ(b.values[2], 1.0);
  EXPECT_EQ(b.gap_mask, (std::vector<bool>{false, true, false}));
}

TEST(ExtractOffsets, NoOverlapThrows) {
  const double nan = kMissing;
  EXPECT_THROW(extract_offsets(station({nan, 1.0}, {2.0, nan})), Error);
  EXPECT_THROW(extract_offsets(station({1.0}, {1.0, 2.0})), ShapeError);
}

TEST(ExtractOffsets, Antisymmetry) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> o(30), m(30);
    for (std::size_t k = 0; k < o.size(); ++k) {
      o[k] = 4.0 * unit_uniform(rng()) - 2.0;
      m[k] = 4.0 * unit_uniform(rng()) - 2.0;
    }
    const auto fwd = extract_offsets(station(o, m));
    const auto rev = extract_offsets(station(m, o));
    for (std::size_t k = 0; k < o.size(); ++k) EXPECT_EQ(fwd.values[k], -rev.values[k]);
  }
}

TEST(CleanSeries, ShortGapInterpolated) {
  OffsetSeries s = gap_free({1.0, 0.0, 0.0, 4.0});
  s.values[1] = s.values[2] = kMissing;
  s.gap_mask = {false, true, true, false};
  const auto segs = clean_series(s, 2);
  ASSERT_EQ(segs.size(), 1u);
  ASSERT_EQ(segs[0].values.size(), 4u);
  EXPECT_DOUBLE_EQ(segs[0].values[1], 2.0);
  EXPECT_DOUBLE_EQ(segs[0].values[2], 3.0);
  EXPECT_FALSE(segs[0].has_gaps());
}

TEST(CleanSeries, LongGapSplits) {
  OffsetSeries s = gap_free({1, 2, 0, 0, 0, 6, 7});
  for (std::size_t k = 2; k < 5; ++k) {
    s.values[k] = kMissing;
    s.gap_mask[k] = true;
  }
  const auto segs = clean_series(s, 2);
  ASSERT_EQ(segs.size(), 2u);
  EXPECT_EQ(segs[0].values, (std::vector<double>{1, 2}));
  EXPECT_EQ(segs[1].values, (std::vector<double>{6, 7}));
  EXPECT_EQ(segs[0].origin_hour, 0u);
  EXPECT_EQ(segs[1].origin_hour, 5u);
}

TEST(CleanSeries, TrimsEdges) {
  OffsetSeries s = gap_free({0, 3, 4, 0});
  s.values[0] = s.values[3] = kMissing;
  s.gap_mask = {true, false, false, true};
  const auto segs = clean_series(s, 2);
  ASSERT_EQ(segs.size(), 1u);
  EXPECT_EQ(segs[0].values, (std::vector<double>{3, 4}));
  EXPECT_EQ(segs[0].origin_hour, 1u);
}

TEST(Scaler, Examples) {
  const std::vector<double> train{-1.0, 0.0, 3.0};
  const auto p = fit_scaler(train);
  EXPECT_EQ(p.min, -1.0);
  EXPECT_EQ(p.max, 3.0);
  EXPECT_EQ(p.scale(1.0), 0.5);
  EXPECT_EQ(p.scale(3.0), 1.0);
  EXPECT_EQ(p.scale(5.0), 1.5);  // unclamped outside the training range
  EXPECT_EQ(p.unscale(0.25), 0.0);
}

TEST(Scaler, DegenerateRange) {
  const std::vector<double> train{2.0, 2.0};
  const auto p = fit_scaler(train);
  EXPECT_TRUE(p.degenerate());
  EXPECT_EQ(p.scale(7.0), 0.0);
  EXPECT_EQ(p.unscale(0.3), 2.0);
  EXPECT_THROW(fit_scaler(std::vector<double>{kMissing}), Error);
}

TEST(Scaler, RoundTrip) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(50);
    for (auto& x : v) x = 10.0 * unit_uniform(rng()) - 5.0;
    const auto p = fit_scaler(v);
    for (double x : v) EXPECT_LE(std::abs(p.unscale(p.scale(x)) - x), 1e-12);
  }
}

TEST(Windows, Example) {
  const auto w = make_windows(gap_free({1, 2, 3, 4, 5}), 2, 1);
  ASSERT_EQ(w.size(), 3u);
  EXPECT_EQ(w[0].input, (std::vector<double>{1, 2}));
  EXPECT_EQ(w[0].target, (std::vector<double>{3}));
  EXPECT_EQ(w[2].input, (std::vector<double>{3, 4}));
  EXPECT_EQ(w[2].target, (std::vector<double>{5}));
  EXPECT_TRUE(make_windows(gap_free({1, 2}), 2, 1).empty());
}

TEST(Windows, CountLawExhaustive) {
  for (std::size_t T = 0; T <= 1000; T += (T < 60 ? 1 : 37)) {
    std::vector<double> v(T);
    for (std::size_t k = 0; k < T; ++k) v[k] = static_cast<double>(k);
    const auto seg = gap_free(v);
    for (std::size_t w_in = 1; w_in <= 24; w_in += 3)
      for (std::size_t w_out = 1; w_out <= 18; w_out += 4) {
        const std::size_t expected = T + 1 > w_in + w_out ? T - w_in - w_out + 1 : 0;
        EXPECT_EQ(window_count(T, w_in, w_out), expected);
        const auto w = make_windows(seg, w_in, w_out);
        ASSERT_EQ(w.size(), expected);
        for (std::size_t k = 0; k < w.size(); ++k) {
          ASSERT_EQ(w[k].input.front(), static_cast<double>(k));
          ASSERT_EQ(w[k].target.back(), static_cast<double>(k + w_in + w_out - 1));
        }
      }
  }
}

TEST(Windows, RejectsGappySegment) {
  OffsetSeries s = gap_free({1, 2, 3, 4});
  s.gap_mask[2] = true;
  EXPECT_THROW(make_windows(s, 2, 1), Error);
}

TEST(Split, Example) {
  std::vector<double> v(10);
  for (std::size_t k = 0; k < 10; ++k) v[k] = static_cast<double>(k);
  const auto [train, test] = chronological_split(gap_free(v), 0.7);
  EXPECT_EQ(train.values, (std::vector<double>{0, 1, 2, 3, 4, 5, 6}));
  EXPECT_EQ(test.values, (std::vector<double>{7, 8, 9}));
  EXPECT_EQ(test.origin_hour, 7u);
  EXPECT_THROW(chronological_split(gap_free(v), 1.0), Error);
}

TEST(Provenance, WindowsStayInsideOneSegment) {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<OffsetSeries> segs;
    for (int st = 0; st < 3; ++st) {
      const std::size_t T = 40 + rng() % 40;
      StationSeries s = station({}, {}, "st0" + std::to_string(st));
      for (std::size_t t = 0; t < T; ++t) {
        const bool missing = rng() % 10 == 0;
        s.observed.push_back(missing ? kMissing : 1.0);
        s.modeled.push_back(static_cast<double>(t));  // offset encodes the station hour
      }
      auto cleaned = clean_series(extract_offsets(s), 2);
      for (auto& c : cleaned) {
        const auto [a, b] = chronological_split(c, 0.5);
        if (a.size()) segs.push_back(a);
        if (b.size()) segs.push_back(b);
      }
    }
    for (const auto& seg : segs)
      for (const auto& w : make_windows(seg, 4, 2)) {
        ASSERT_EQ(w.station_id, seg.station_id);
        ASSERT_GE(w.t_index, seg.origin_hour);
        ASSERT_LE(w.t_index + 6, seg.origin_hour + seg.size());
        // Consecutive hours (interpolation preserves a linear ramp).
        std::vector<double> all(w.input);
        all.insert(all.end(), w.target.begin(), w.target.end());
        for (std::size_t k = 0; k < all.size(); ++k)
          ASSERT_NEAR(all[k], static_cast<double>(w.t_index + k) - 1.0, 1e-9);
      }
  }
}

TEST(BuildDatasets, ScalerUsesTrainingSegmentsOnly) {
  const std::vector<OffsetSeries> train{gap_free({0, 1, 2, 3, 4}, "a"), gap_free({-1, 2, 5}, "b")};
  const std::vector<OffsetSeries> test{gap_free({10, 20, 30, 40}, "c")};
  const auto pair = build_datasets(train, test, 2, 1);
  EXPECT_EQ(pair.train.scaler.min, -1.0);
  EXPECT_EQ(pair.train.scaler.max, 5.0);
  EXPECT_EQ(pair.test.scaler, pair.train.scaler);
  EXPECT_EQ(pair.train_hours, 8u);
  EXPECT_EQ(pair.train.size(), 3u + 1u);
  EXPECT_EQ(pair.test.size(), 2u);
  EXPECT_DOUBLE_EQ(pair.test.samples[0].input[0], 11.0 / 6.0);

  // Changing the test data leaves the fitted scaler untouched.
  const std::vector<OffsetSeries> other{gap_free({-100, 100, 0}, "c")};
  EXPECT_EQ(build_datasets(train, other, 2, 1).train.scaler, pair.train.scaler);
  // A pooled fit would have differed.
  std::vector<double> pooled{0, 1, 2, 3, 4, -1, 2, 5, 10, 20, 30, 40};
  EXPECT_NE(fit_scaler(pooled), pair.train.scaler);
}

TEST(BuildDatasets, SampleOrderIsCanonical) {
  const std::vector<OffsetSeries> train{gap_free({5, 6, 7, 8}, "b", 3), gap_free({1, 2, 3, 4}, "a", 0),
                                        gap_free({1, 2, 3}, "a", 10)};
  const auto pair = build_datasets(train, {}, 2, 1);
  ASSERT_EQ(pair.train.size(), 2u + 1u + 2u);
  EXPECT_EQ(pair.train.samples[0].station_id, "a");
  EXPECT_EQ(pair.train.samples[1].t_index, 1u);
  EXPECT_EQ(pair.train.samples[2].t_index, 10u);
  EXPECT_EQ(pair.train.samples[3].station_id, "b");
}

TEST(Timestamps, RoundTrip) {
  const auto t = parse_utc("2012-10-29T23:00:00Z");
  EXPECT_EQ(format_utc(t), "2012-10-29T23:00:00Z");
  EXPECT_EQ(format_utc(t + Hours(1)), "2012-10-30T00:00:00Z");
  EXPECT_THROW(parse_utc("2012-13-01T00:00:00Z"), Error);
  EXPECT_THROW(parse_utc("yesterday"), Error);
}

TEST(StormCsv, ParsesAndFillsSkippedHours) {
  std::istringstream in(
      "station_id,timestamp,observed_ft,modeled_ft\n"
      "b,2020-01-01T00:00:00Z,1.0,1.5\n"
      "a,2020-01-01T00:00:00Z,2,2.25\n"
      "a,2020-01-01T02:00:00Z,3,3\n"
      "b,2020-01-01T01:00:00Z,,0.5\n");
  const auto storm = read_storm_csv(in, "x");
  ASSERT_EQ(storm.stations.size(), 2u);
  const auto& a = storm.stations[0];
  EXPECT_EQ(a.station_id, "a");
  ASSERT_EQ(a.size(), 3u);
  EXPECT_TRUE(std::isnan(a.observed[1]));
  EXPECT_EQ(a.modeled[2], 3.0);
  EXPECT_TRUE(std::isnan(storm.stations[1].observed[1]));

  std::ostringstream out;
  write_storm_csv(out, storm);
  std::istringstream again(out.str());
  const auto back = read_storm_csv(again, "x");
  ASSERT_EQ(back.stations[0].size(), a.size());
  for (std::size_t t = 0; t < a.size(); ++t) {
    EXPECT_EQ(std::isnan(back.stations[0].observed[t]), std::isnan(a.observed[t]));
    if (!std::isnan(a.modeled[t])) {
      EXPECT_EQ(back.stations[0].modeled[t], a.modeled[t]);
    }
  }
}

TEST(StormCsv, Errors) {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return read_storm_csv(in, "x");
  };
  EXPECT_THROW(parse("station,time,o,m\n"), Error);
  EXPECT_THROW(parse("station_id,timestamp,observed_ft,modeled_ft\na,2020-01-01T00:00:00Z,1\n"), Error);
  EXPECT_THROW(parse("station_id,timestamp,observed_ft,modeled_ft\na,2020-01-01T00:00:00Z,x,1\n"), Error);
  EXPECT_THROW(parse("station_id,timestamp,observed_ft,modeled_ft\n"
                     "a,2020-01-01T01:00:00Z,1,1\na,2020-01-01T00:00:00Z,1,1\n"),
               Error);
  EXPECT_THROW(parse("station_id,timestamp,observed_ft,modeled_ft\n"
                     "a,2020-01-01T00:00:00Z,1,1\na,2020-01-01T00:30:00Z,1,1\n"),
               Error);
}

TEST(ManifestFile, RoundTripAndLookup) {
  const auto dir = std::filesystem::temp_directory_path() / "surgecorr_manifest_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "manifest.csv");
    write_manifest(out, {{"s1", "Alpha", 2001, "3", "s1.csv"}, {"s2", "Beta", 2002, "TS", "s2.csv"}});
  }
  const auto m = read_manifest(dir / "manifest.csv");
  ASSERT_EQ(m.storms.size(), 2u);
  EXPECT_EQ(m.find("s2")->year, 2002);
  EXPECT_EQ(m.resolve("s1"), dir / "s1.csv");
  EXPECT_THROW(m.resolve("s9"), Error);
  {
    std::ofstream out(dir / "dup.csv");
    write_manifest(out, {{"s1", "A", 1, "1", "a"}, {"s1", "B", 2, "2", "b"}});
  }
  EXPECT_THROW(read_manifest(dir / "dup.csv"), Error);
  std::filesystem::remove_all(dir);
}
