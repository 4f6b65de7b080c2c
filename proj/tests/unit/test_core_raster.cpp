#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "aqs/core/csv.hpp"
#include "aqs/core/error.hpp"
#include "aqs/core/files.hpp"
#include "aqs/core/parallel.hpp"
#include "aqs/core/text.hpp"
#include "aqs/raster/ascii_grid.hpp"
#include "aqs/raster/geotiff.hpp"
#include "aqs/raster/io.hpp"
#include "aqs/raster/ops.hpp"
#include "support/temp_dir.hpp"

namespace {

using namespace aqs;
using namespace aqs::raster;

const std::string kData = AQS_TEST_DATA_DIR;

RasterLayer make_layer(Variable v, std::size_t rows, std::size_t cols, double west = 77.5, double north = 13.1,
                       double dx = 0.01, double dy = 0.01) {
  std::vector<double> vals(rows * cols);
  for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = 0.25 * static_cast<double>(i) - 3.0;
  return RasterLayer(v, Temporal::of_month(2019, 3), GridSpec::from_origin(west, north, dx, dy, rows, cols), vals);
}

void expect_same_values(const RasterLayer& a, const RasterLayer& b) {
  ASSERT_EQ(a.values.size(), b.values.size());
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    if (is_missing(a.values[i])) {
      EXPECT_TRUE(is_missing(b.values[i])) << "cell " << i;
    } else {
      EXPECT_EQ(a.values[i], b.values[i]) << "cell " << i;
    }
  }
}

// ---- text and csv ----

TEST(Text, FormatDoubleRoundTrips) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = d(rng);
    EXPECT_EQ(*text::parse_double(text::format_double(v)), v);
  }
}

TEST(Text, ParseRejectsTrailingGarbage) {
  EXPECT_FALSE(text::parse_double("1.5x"));
  EXPECT_FALSE(text::parse_double(""));
  EXPECT_EQ(*text::parse_double(" +2.5 "), 2.5);
  EXPECT_EQ(*text::parse_int<int>("42"), 42);
  EXPECT_FALSE(text::parse_int<int>("4.2"));
}

TEST(Text, FnvIsStable) {
  EXPECT_EQ(text::fnv1a_hex(""), text::fnv1a_hex(""));
  EXPECT_NE(text::fnv1a_hex("a"), text::fnv1a_hex("b"));
  EXPECT_EQ(text::fnv1a_hex("abc").size(), 16u);
}

TEST(Csv, QuotedFieldsAndLineNumbers) {
  const auto doc = csv::parse("a,b\n\n\"x,1\",\"he said \"\"hi\"\"\"\n2,3\n", "t.csv");
  ASSERT_EQ(doc.header, (std::vector<std::string>{"a", "b"}));
  ASSERT_EQ(doc.records.size(), 2u);
  EXPECT_EQ(doc.records[0].first, 3u);
  EXPECT_EQ(doc.records[0].second[0], "x,1");
  EXPECT_EQ(doc.records[0].second[1], "he said \"hi\"");
  EXPECT_EQ(doc.records[1].first, 4u);
}

TEST(Csv, QuoteRoundTrip) {
  const std::vector<std::string> fields{"plain", "with,comma", "with \"quote\"", ""};
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) line += (i ? "," : "") + csv::quote(fields[i]);
  EXPECT_EQ(csv::parse_record(line), fields);
}

TEST(Csv, HeaderMismatchIsDataError) {
  const auto doc = csv::parse("x,y\n1,2\n", "t.csv");
  EXPECT_THROW(csv::require_header(doc, {"a", "b"}, "t.csv"), DataError);
}

TEST(Files, WriteAtomicThenRead) {
  test_support::TempDir dir;
  const auto p = dir / "sub" / "f.txt";
  files::write_atomic(p, "hello");
  EXPECT_EQ(files::read_text(p), "hello");
  EXPECT_THROW(files::read_text(dir / "missing.txt"), DataError);
}

TEST(Parallel, VisitsEveryIndexOnce) {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);
}

// ---- geometry ----

TEST(Geo, FromBoundsCountsCells) {
  const double lat = 12.97;
  const double half_w = 15000.0 / meters_per_degree_lon(lat);
  const double half_h = 15000.0 / kMetersPerDegreeLat;
  const GeoBounds b{77.59 - half_w, 77.59 + half_w, lat - half_h, lat + half_h};
  const auto g = GridSpec::from_bounds(b, 3000.0);
  EXPECT_EQ(g.rows, 10u);
  EXPECT_EQ(g.cols, 10u);
  EXPECT_EQ(GridSpec::from_bounds(b, 3100.0).rows, 10u);
  EXPECT_EQ(GridSpec::from_bounds(b, 2900.0).rows, 11u);
  EXPECT_THROW(GridSpec::from_bounds(GeoBounds{1, 1, 0, 1}), DataError);
  EXPECT_THROW(GridSpec::from_bounds(b, 0.0), DataError);
}

// ---- ascii grid ----

TEST(AsciiGrid, RoundTripWithNodata) {
  auto layer = make_layer(Variable::rainfall, 3, 5);
  layer.values[7] = kMissing;
  const auto text = ascii_grid::format(layer);
  const auto back = ascii_grid::parse(text, "mem.asc", Variable::rainfall, layer.temporal);
  EXPECT_EQ(back.grid.rows, 3u);
  EXPECT_EQ(back.grid.cols, 5u);
  EXPECT_NEAR(back.grid.bounds.min_lon, 77.5, 1e-12);
  EXPECT_NEAR(back.grid.bounds.max_lat, 13.1, 1e-12);
  expect_same_values(layer, back);
}

TEST(AsciiGrid, NonSquareCellsUseDxDy) {
  const auto layer = make_layer(Variable::elevation, 2, 2, 77.5, 13.1, 0.01, 0.02);
  const auto text = ascii_grid::format(layer);
  EXPECT_NE(text.find("dx "), std::string::npos);
  const auto back = ascii_grid::parse(text, "mem.asc", Variable::elevation, Temporal::fixed());
  EXPECT_NEAR(back.grid.cell_height_deg(), 0.02, 1e-12);
  EXPECT_NEAR(back.grid.cell_width_deg(), 0.01, 1e-12);
}

TEST(AsciiGrid, CenterReferenceAndErrors) {
  const std::string centered =
      "ncols 2\nnrows 1\nxllcenter 77.505\nyllcenter 13.005\ncellsize 0.01\nNODATA_value -1\n1 -1\n";
  const auto l = ascii_grid::parse(centered, "c.asc", Variable::elevation, Temporal::fixed());
  EXPECT_NEAR(l.grid.bounds.min_lon, 77.5, 1e-12);
  EXPECT_TRUE(is_missing(l.values[1]));

  EXPECT_THROW(ascii_grid::parse("ncols 2\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\n1\n", "short.asc",
                                 Variable::elevation, Temporal::fixed()),
               DataError);
  EXPECT_THROW(ascii_grid::parse("ncols 1\nnrows 1\ncellsize 1\n1\n", "nogeo.asc", Variable::elevation,
                                 Temporal::fixed()),
               MissingGeoreference);
}

// ---- geotiff ----

class GeoTiffRoundTrip : public ::testing::TestWithParam<geotiff::WriteOptions> {};

TEST_P(GeoTiffRoundTrip, PreservesValuesAndGrid) {
  auto layer = make_layer(Variable::temperature, 37, 21, 77.4, 13.2, 0.005, 0.004);
  layer.values[0] = kMissing;
  layer.values[100] = kMissing;
  const auto bytes = geotiff::format(layer, GetParam());
  const auto back = geotiff::parse(bytes, "mem.tif", Variable::temperature, layer.temporal);
  EXPECT_EQ(back.grid.rows, 37u);
  EXPECT_EQ(back.grid.cols, 21u);
  EXPECT_NEAR(back.grid.bounds.min_lon, layer.grid.bounds.min_lon, 1e-12);
  EXPECT_NEAR(back.grid.bounds.max_lat, layer.grid.bounds.max_lat, 1e-12);
  EXPECT_NEAR(back.grid.cell_width_deg(), 0.005, 1e-12);
  EXPECT_NEAR(back.grid.cell_height_deg(), 0.004, 1e-12);
  expect_same_values(layer, back);
}

INSTANTIATE_TEST_SUITE_P(Layouts, GeoTiffRoundTrip,
                         ::testing::Values(geotiff::WriteOptions{false, 256, geotiff::Compression::none},
                                           geotiff::WriteOptions{false, 256, geotiff::Compression::deflate},
                                           geotiff::WriteOptions{true, 16, geotiff::Compression::none},
                                           geotiff::WriteOptions{true, 32, geotiff::Compression::deflate}),
                         [](const auto& info) {
                           const auto& o = info.param;
                           return (o.tiled ? "tiled" + std::to_string(o.tile_size) : std::string("strips")) +
                                  (o.compression == geotiff::Compression::deflate ? "_deflate" : "_none");
                         });

TEST(GeoTiff, WriterRejectsUnsupportedOptions) {
  const auto layer = make_layer(Variable::temperature, 2, 2);
  EXPECT_THROW(geotiff::format(layer, {false, 256, geotiff::Compression::lzw}), UsageError);
  EXPECT_THROW(geotiff::format(layer, {true, 20, geotiff::Compression::none}), UsageError);
}

// Files produced by independent encoders: every file is a 3x4 grid at
// origin (77.5 E, 13.1 N), 0.01 x 0.02 degree cells, cell [1,2] nodata.
struct ExternalTiff {
  const char* name;
  bool integer;  // values truncated to integers by the writer
};

class ExternalTiffs : public ::testing::TestWithParam<ExternalTiff> {};

TEST_P(ExternalTiffs, DecodesToKnownGrid) {
  const auto p = GetParam();
  const auto layer = read_raster(kData + "/" + p.name, Variable::night_lights, Temporal::fixed());
  ASSERT_EQ(layer.grid.rows, 3u);
  ASSERT_EQ(layer.grid.cols, 4u);
  EXPECT_NEAR(layer.grid.bounds.min_lon, 77.5, 1e-9);
  EXPECT_NEAR(layer.grid.bounds.max_lat, 13.1, 1e-9);
  EXPECT_NEAR(layer.grid.cell_width_deg(), 0.01, 1e-9);
  EXPECT_NEAR(layer.grid.cell_height_deg(), 0.02, 1e-9);
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 4; ++c) {
      const double v = layer.at(r, c);
      if (r == 1 && c == 2) {
        EXPECT_TRUE(is_missing(v)) << p.name;
        continue;
      }
      double expected = 1.5 * static_cast<double>(r * 4 + c + 1);
      if (p.integer) expected = std::trunc(expected);
      EXPECT_EQ(v, expected) << p.name << " [" << r << "," << c << "]";
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Encoders, ExternalTiffs,
                         ::testing::Values(ExternalTiff{"pillow_lzw_f32.tif", false},
                                           ExternalTiff{"pillow_deflate_f32.tif", false},
                                           ExternalTiff{"pillow_packbits_u8.tif", true},
                                           ExternalTiff{"mm_f64_strips.tif", false},
                                           ExternalTiff{"ii_f32_pred3_deflate.tif", false},
                                           ExternalTiff{"mm_i16_pred2_deflate_tiled.tif", true}),
                         [](const auto& info) {
                           std::string n = info.param.name;
                           n = n.substr(0, n.find('.'));
                           return n;
                         });

TEST(GeoTiff, CorruptInputIsDataError) {
  EXPECT_THROW(geotiff::parse("not a tiff", "junk.tif", Variable::tvcd, Temporal::fixed()), DataError);
  auto bytes = files::read_text(kData + "/pillow_lzw_f32.tif");
  bytes.resize(bytes.size() / 2);
  EXPECT_THROW(geotiff::parse(bytes, "cut.tif", Variable::tvcd, Temporal::fixed()), DataError);
}

TEST(RasterIo, UnknownExtensionIsDataError) {
  EXPECT_THROW(format_from_path("x.png"), DataError);
  EXPECT_THROW(parse_format("png"), UsageError);
}

TEST(RasterLayer, UnitMustMatchCatalog) {
  auto layer = make_layer(Variable::tvcd, 1, 1);
  layer.unit = "furlongs";
  EXPECT_THROW(layer.validate(), DataError);
}

// ---- ops ----

TEST(Ops, SampleAtPicksNearestCenterWithTieRule) {
  auto layer = make_layer(Variable::elevation, 2, 2, 0.0, 2.0, 1.0, 1.0);
  layer.values = {1, 2, 3, 4};
  EXPECT_EQ(sample_at(layer, 0.2, 1.8), 1.0);
  EXPECT_EQ(sample_at(layer, 1.7, 0.3), 4.0);
  // Exactly between all four centers: smaller row, then smaller column.
  EXPECT_EQ(sample_at(layer, 1.0, 1.0), 1.0);
  EXPECT_EQ(sample_at(layer, 1.0, 0.4), 3.0);
  EXPECT_THROW(sample_at(layer, 2.5, 1.0), OutOfBounds);
}

TEST(Ops, ResampleAveragesFinerSourceIgnoringNodata) {
  auto fine = make_layer(Variable::rainfall, 4, 4, 0.0, 4.0, 1.0, 1.0);
  for (std::size_t i = 0; i < 16; ++i) fine.values[i] = static_cast<double>(i);
  fine.values[0] = kMissing;
  const auto target = GridSpec::from_origin(0.0, 4.0, 2.0, 2.0, 2, 2);
  const auto out = resample_to_grid(fine, target);
  EXPECT_DOUBLE_EQ(out.values[0], (1.0 + 4.0 + 5.0) / 3.0);
  EXPECT_DOUBLE_EQ(out.values[1], (2.0 + 3.0 + 6.0 + 7.0) / 4.0);
  EXPECT_DOUBLE_EQ(out.values[3], (10.0 + 11.0 + 14.0 + 15.0) / 4.0);
}

TEST(Ops, ResampleCoarserSourceTakesCellUnderCenter) {
  auto coarse = make_layer(Variable::rainfall, 1, 2, 0.0, 2.0, 2.0, 2.0);
  coarse.values = {10.0, 20.0};
  const auto target = GridSpec::from_origin(0.0, 2.0, 0.5, 0.5, 4, 8);
  const auto out = resample_to_grid(coarse, target);
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 8; ++c) EXPECT_EQ(out.at(r, c), c < 4 ? 10.0 : 20.0);
}

TEST(Ops, ResampleIdentityGridIsExact) {
  const auto layer = make_layer(Variable::rainfall, 5, 7);
  const auto out = resample_to_grid(layer, layer.grid);
  expect_same_values(layer, out);
}

TEST(Ops, ResampleDisjointIsDataError) {
  const auto layer = make_layer(Variable::rainfall, 2, 2, 0.0, 2.0, 1.0, 1.0);
  EXPECT_THROW(resample_to_grid(layer, GridSpec::from_origin(10.0, 12.0, 1.0, 1.0, 2, 2)), DataError);
}

TEST(Ops, CompositeIsOrderInvariantMeanIgnoringNodata) {
  std::vector<RasterLayer> months;
  for (int m = 1; m <= 12; ++m) {
    auto l = make_layer(Variable::temperature, 2, 3);
    l.temporal = Temporal::of_month(2019, m);
    for (std::size_t i = 0; i < l.values.size(); ++i) l.values[i] = 0.1 * m + static_cast<double>(i);
    if (m == 5) l.values[2] = kMissing;
    months.push_back(l);
  }
  for (auto& l : months) l.values[5] = kMissing;
  const auto a = temporal_composite(months);
  std::reverse(months.begin(), months.end());
  const auto b = temporal_composite(months);
  EXPECT_EQ(a.temporal, Temporal::of_year(2019));
  expect_same_values(a, b);
  EXPECT_NEAR(a.values[0], 0.65, 1e-12);
  EXPECT_NEAR(a.values[2], 2.0 + (7.8 - 0.5) / 11.0, 1e-12);
  EXPECT_TRUE(is_missing(a.values[5]));
}

TEST(Ops, CompositeRejectsMixedInputs) {
  const auto a = make_layer(Variable::temperature, 2, 2);
  const auto b = make_layer(Variable::rainfall, 2, 2);
  const auto c = make_layer(Variable::temperature, 3, 2);
  EXPECT_THROW(temporal_composite(std::vector{a, b}), DataError);
  EXPECT_THROW(temporal_composite(std::vector{a, c}), DataError);
  EXPECT_THROW(temporal_composite(std::vector<RasterLayer>{}), DataError);
}

}  // namespace
