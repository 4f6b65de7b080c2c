#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "aqs/core/error.hpp"
#include "aqs/dataset/builder.hpp"
#include "aqs/dataset/observation.hpp"
#include "aqs/dataset/station.hpp"
#include "aqs/dataset/table.hpp"
#include "support/oracles.hpp"

namespace {

using namespace aqs;
using namespace aqs::dataset;
using raster::GridSpec;
using raster::RasterLayer;
using raster::Temporal;

TEST(Stations, ParseAndFormatRoundTrip) {
  const auto s = parse_stations("id,name,lon,lat\nS1,\"Hebbal, North\",77.59,13.03\nS2,Peenya,77.51,13.02\n", "s.csv");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].name, "Hebbal, North");
  EXPECT_EQ(parse_stations(format_stations(s), "again.csv"), s);
}

TEST(Stations, RejectsBadRows) {
  EXPECT_THROW(parse_stations("id,name,lon,lat\nS1,a,200,13\n", "s.csv"), DataError);
  EXPECT_THROW(parse_stations("id,name,lon,lat\nS1,a,x,13\n", "s.csv"), DataError);
  EXPECT_THROW(parse_stations("id,name,lon,lat\nS1,a,77,13\nS1,b,77,13\n", "s.csv"), DataError);
  EXPECT_THROW(parse_stations("station,lon,lat\nS1,77,13\n", "s.csv"), DataError);
  try {
    parse_stations("id,name,lon,lat\nS1,a,77,13\nS2,b,77,95\n", "s.csv");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("s.csv:3"), std::string::npos) << e.what();
  }
}

TEST(GroundTruth, SkipsEmptyValuesAndLowercasesPollutant) {
  const auto gt = parse_ground_truth(
      "station_id,year,month,pollutant,value\nS1,2019,1,NO2,30.5\nS1,2019,2,no2,\nS2,2019,1,pm25,12\n", "g.csv");
  EXPECT_EQ(gt.skipped_empty, 1u);
  ASSERT_EQ(gt.observations.size(), 2u);
  EXPECT_EQ(gt.observations[0].pollutant, "no2");
  EXPECT_EQ(parse_ground_truth(format_ground_truth(gt.observations), "g2.csv").observations, gt.observations);
}

TEST(GroundTruth, RejectsBadRows) {
  const std::string h = "station_id,year,month,pollutant,value\n";
  EXPECT_THROW(parse_ground_truth(h + "S1,2019,13,no2,1\n", "g.csv"), DataError);
  EXPECT_THROW(parse_ground_truth(h + "S1,20x9,1,no2,1\n", "g.csv"), DataError);
  EXPECT_THROW(parse_ground_truth(h + "S1,2019,1,no2,-1\n", "g.csv"), DataError);
  EXPECT_THROW(parse_ground_truth(h + "S1,2019,1,no2,abc\n", "g.csv"), DataError);
}

// Two 2x2 layers over [0,2]x[0,2]: tvcd varies by month, elevation is static.
RasterSet small_rasters() {
  RasterSet set;
  const auto g = GridSpec::from_origin(0.0, 2.0, 1.0, 1.0, 2, 2);
  for (int m = 1; m <= 12; ++m)
    set.add(RasterLayer(Variable::tvcd, Temporal::of_month(2019, m), g, {1.0 * m, 2.0 * m, 3.0 * m, 4.0 * m}));
  set.add(RasterLayer(Variable::elevation, Temporal::fixed(), g, {100, raster::kMissing, 300, 400}));
  return set;
}

TEST(Builder, ExtractsOneRowPerStationMonth) {
  const std::vector<Station> stations{{"A", "", 0.5, 1.5}, {"B", "", 1.5, 1.5}, {"C", "", 1.5, 0.5}, {"D", "", 5, 5}};
  const auto table = extract_features(stations, small_rasters(), months_of(2019), {Variable::tvcd, Variable::elevation});
  ASSERT_EQ(table.size(), 48u);
  const auto& r = table.rows[4 * 2 + 2];  // March, station C
  EXPECT_EQ(r.station_id, "C");
  EXPECT_EQ(r.month, 3);
  EXPECT_EQ(r.features[0], 12.0);
  EXPECT_EQ(r.features[1], 400.0);
  EXPECT_TRUE(is_missing(table.rows[1].features[1]));  // B sits on the nodata elevation cell
  EXPECT_TRUE(is_missing(table.rows[3].features[0]));  // D is outside every layer
  EXPECT_TRUE(is_missing(r.target));
}

TEST(Builder, MissingMonthNamesVariable) {
  RasterSet set;
  const auto g = GridSpec::from_origin(0.0, 2.0, 1.0, 1.0, 2, 2);
  set.add(RasterLayer(Variable::rainfall, Temporal::of_month(2019, 1), g, {1, 2, 3, 4}));
  try {
    extract_features({{"A", "", 0.5, 0.5}}, set, months_of(2019), {Variable::rainfall});
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("rainfall"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("2019-2"), std::string::npos);
  }
  EXPECT_THROW(extract_features({}, set, months_of(2019), {Variable::ground_pollutant}), DataError);
}

TEST(Builder, JoinAndClean) {
  const std::vector<Station> stations{{"A", "", 0.5, 1.5}, {"B", "", 1.5, 1.5}};
  auto table = extract_features(stations, small_rasters(), months_of(2019), {Variable::tvcd, Variable::elevation});
  std::vector<GroundObservation> obs;
  for (int m = 1; m <= 12; ++m) {
    if (m != 6) obs.push_back({"A", 2019, m, "no2", 10.0 + m});
    obs.push_back({"B", 2019, m, "no2", 20.0 + m});
    obs.push_back({"A", 2019, m, "pm25", 99.0});
  }
  const auto joined = join_targets(table, obs, "NO2");
  EXPECT_EQ(joined.rows[0].target, 11.0);
  EXPECT_TRUE(is_missing(joined.rows[10].target));  // A, June

  const auto cleaned = clean(joined);
  EXPECT_EQ(cleaned.removed, 13u);  // all of B (nodata elevation) plus A in June
  EXPECT_EQ(cleaned.table.size(), 11u);
  for (const auto& r : cleaned.table.rows) EXPECT_TRUE(r.complete());

  obs.push_back({"B", 2019, 1, "no2", 1.0});
  EXPECT_THROW(join_targets(table, obs, "no2"), DataError);
}

TEST(Table, CleanThatEmptiesTableIsDataError) {
  TrainingTable t;
  t.feature_names = {Variable::tvcd};
  t.rows.push_back({"A", 2019, 1, {raster::kMissing}, 1.0});
  EXPECT_THROW(clean(t), DataError);
}

TEST(Table, CsvRoundTripKeepsMissingCells) {
  TrainingTable t;
  t.feature_names = {Variable::tvcd, Variable::wind_speed};
  t.rows.push_back({"A", 2019, 1, {1.25e-4, 3.5}, 30.0});
  t.rows.push_back({"B,x", 2019, 2, {raster::kMissing, 2.0}, raster::kMissing});
  const auto back = parse_table(format_table(t), "t.csv");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back.feature_names, t.feature_names);
  EXPECT_EQ(back.rows[0].features, t.rows[0].features);
  EXPECT_EQ(back.rows[1].station_id, "B,x");
  EXPECT_TRUE(is_missing(back.rows[1].features[0]));
  EXPECT_TRUE(is_missing(back.rows[1].target));
  EXPECT_EQ(format_table(back), format_table(t));
}

TEST(Table, SelectFeaturesReordersAndRejectsUnknown) {
  TrainingTable t;
  t.feature_names = {Variable::tvcd, Variable::wind_speed, Variable::elevation};
  t.rows.push_back({"A", 2019, 1, {1, 2, 3}, 4});
  const auto s = select_features(t, {Variable::elevation, Variable::tvcd});
  EXPECT_EQ(s.rows[0].features, (std::vector<double>{3, 1}));
  EXPECT_THROW(select_features(t, {Variable::rainfall}), DataError);
}

TrainingTable numbered(std::size_t n) {
  TrainingTable t;
  t.feature_names = {Variable::tvcd};
  for (std::size_t i = 0; i < n; ++i) t.rows.push_back({"S" + std::to_string(i), 2019, 1, {double(i)}, double(i)});
  return t;
}

TEST(Split, SizesDisjointExhaustiveAndSeedStable) {
  for (std::size_t n = 2; n <= 200; ++n) {
    const auto t = numbered(n);
    const auto [train, test] = split(t, 0.7, 11);
    EXPECT_EQ(train.size(), test_support::seventy_percent(n)) << n;
    EXPECT_EQ(train.size() + test.size(), n);
    std::set<std::string> ids;
    for (const auto& r : train.rows) ids.insert(r.station_id);
    for (const auto& r : test.rows) EXPECT_TRUE(ids.insert(r.station_id).second) << "row in both halves";
    EXPECT_EQ(ids.size(), n);
    const auto [train2, test2] = split(t, 0.7, 11);
    EXPECT_EQ(format_table(train2), format_table(train));
  }
}

TEST(Split, DifferentSeedsShuffleDifferently) {
  const auto t = numbered(50);
  EXPECT_NE(format_table(split(t, 0.7, 1).first), format_table(split(t, 0.7, 2).first));
}

TEST(Split, RejectsTinyTablesAndBadFractions) {
  EXPECT_THROW(split(numbered(1), 0.7, 1), DataError);
  EXPECT_THROW(split(numbered(10), 1.0, 1), UsageError);
  EXPECT_THROW(split(numbered(10), 0.0, 1), UsageError);
}

}  // namespace
