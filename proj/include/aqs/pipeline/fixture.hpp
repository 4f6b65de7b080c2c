#pragma once

#include <nlohmann/json.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "aqs/core/error.hpp"
#include "aqs/core/files.hpp"
#include "aqs/dataset/builder.hpp"
#include "aqs/dataset/observation.hpp"
#include "aqs/dataset/station.hpp"
#include "aqs/grid/study_area.hpp"
#include "aqs/pipeline/rasters.hpp"
#include "aqs/pipeline/workflow.hpp"
#include "aqs/raster/io.hpp"

namespace aqs::pipeline {

using nlohmann::json;

struct FixtureOptions {
  std::uint64_t seed = 7;
  std::string city = "fixture_city";
  std::string name = "Fixture City";
  int year = 2019;
  std::string pollutant = "no2";
  std::size_t stations = 40;
  RasterFormat format = RasterFormat::geotiff;
  double center_lon = 77.59;
  double center_lat = 12.97;
  double extent_m = 30000.0;  // square study area side
  double noise_sigma = 0.6;   // µg/m³
};

// How each driving factor is synthesized: raw = base + scale * u, where u is
// a smooth field in about [-1, 1] plus a seasonal term; `weight` is the
// target's sensitivity to u (µg/m³ per unit u).
struct FactorRecipe {
  Variable variable;
  double base;
  double scale;
  double resolution_deg;
  double seasonal_amplitude;  // in u units; 0 for static factors
  double weight;
};

inline const std::array<FactorRecipe, 7>& fixture_recipes() {
  static const std::array<FactorRecipe, 7> recipes{{
      {Variable::tvcd, 1.2e-4, 5e-5, 0.01, 0.5, 9.0},
      {Variable::rainfall, 80.0, 60.0, 0.05, 0.8, -1.5},
      {Variable::temperature, 298.0, 4.0, 0.04, 0.6, -2.0},
      {Variable::wind_speed, 3.0, 1.2, 0.027, 0.4, -2.5},
      {Variable::population, 12000.0, 8000.0, 0.01, 0.0, 2.0},
      {Variable::elevation, 900.0, 60.0, 0.0125, 0.0, -1.0},
      {Variable::night_lights, 30.0, 20.0, 0.005, 0.2, 1.5},
  }};
  return recipes;
}

inline constexpr double kFixtureBaseline = 35.0;  // µg/m³ at u = 0 for every factor

inline grid::StudyArea fixture_area(const FixtureOptions& o) {
  const double half_lat = 0.5 * o.extent_m / raster::kMetersPerDegreeLat;
  const double half_lon = 0.5 * o.extent_m / raster::meters_per_degree_lon(o.center_lat);
  grid::StudyArea a;
  a.id = o.city;
  a.name = o.name;
  a.bounds = {o.center_lon - half_lon, o.center_lon + half_lon, o.center_lat - half_lat, o.center_lat + half_lat};
  a.bounds.validate();
  return a;
}

namespace detail {

struct Bump {
  double lon, lat, width, amplitude;
};

// Smooth spatial field: a tilted plane plus Gaussian bumps.
struct Field {
  double gx = 0.0, gy = 0.0;
  std::vector<Bump> bumps;

  double operator()(double lon, double lat, const grid::GeoBounds& b) const {
    const double x = (lon - b.min_lon) / (b.max_lon - b.min_lon) - 0.5;
    const double y = (lat - b.min_lat) / (b.max_lat - b.min_lat) - 0.5;
    double v = gx * x + gy * y;
    for (const auto& k : bumps) {
      const double dx = (lon - k.lon) / k.width, dy = (lat - k.lat) / k.width;
      v += k.amplitude * std::exp(-0.5 * (dx * dx + dy * dy));
    }
    return v;
  }
};

inline Field random_field(std::mt19937_64& rng, const grid::GeoBounds& b, int bumps, double scale) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> lon(b.min_lon, b.max_lon), lat(b.min_lat, b.max_lat);
  std::uniform_real_distribution<double> width(0.04, 0.12);
  Field f;
  f.gx = scale * unit(rng);
  f.gy = scale * unit(rng);
  for (int i = 0; i < bumps; ++i) f.bumps.push_back({lon(rng), lat(rng), width(rng), scale * unit(rng)});
  return f;
}

}  // namespace detail

struct FixtureSummary {
  fs::path root;
  std::size_t rasters_written = 0;
  std::size_t stations = 0;
  std::size_t observations = 0;
  json manifest;
};

// Writes a complete synthetic city under `root`:
//   area.json, stations.csv, ground_truth.csv, manifest.json, catalog.json,
//   rasters/<variable>_<YYYY>_<MM>.<ext>   (7 factors x 12 months)
// Targets are intercept + sum(coefficient * harmonized feature) + N(0, sigma),
// with features taken exactly as build_dataset will extract them.
inline FixtureSummary make_fixture(const fs::path& root, const FixtureOptions& o) {
  if (o.stations < 1) throw UsageError("fixture needs at least one station");
  if (!(o.noise_sigma >= 0.0)) throw UsageError("noise sigma must be non-negative");
  const auto area = fixture_area(o);
  const auto& ab = area.bounds;
  constexpr double kPad = 0.02;  // rasters extend past the area on every side
  const grid::GeoBounds rb{ab.min_lon - kPad, ab.max_lon + kPad, ab.min_lat - kPad, ab.max_lat + kPad};

  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  fs::create_directories(root / "rasters");
  FixtureSummary summary;
  summary.root = root;

  // Rasters: one static spatial pattern per factor, a seasonal cycle and a
  // weaker month-specific perturbation.
  for (const auto& rc : fixture_recipes()) {
    const auto base_field = detail::random_field(rng, rb, 3, 0.6);
    const double phase = 12.0 * uni(rng);
    const std::size_t cols = static_cast<std::size_t>(std::ceil((rb.max_lon - rb.min_lon) / rc.resolution_deg));
    const std::size_t rows = static_cast<std::size_t>(std::ceil((rb.max_lat - rb.min_lat) / rc.resolution_deg));
    const auto spec = raster::GridSpec::from_origin(rb.min_lon, rb.max_lat, rc.resolution_deg, rc.resolution_deg,
                                                    rows, cols);
    const bool is_static = rc.seasonal_amplitude == 0.0;
    for (int m = 1; m <= 12; ++m) {
      const auto month_field = detail::random_field(rng, rb, 2, is_static ? 0.0 : 0.25);
      const double seasonal = rc.seasonal_amplitude * std::cos(2.0 * std::numbers::pi * (m - phase) / 12.0);
      std::vector<double> values(spec.size());
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
          const double lon = spec.center_lon(c), lat = spec.center_lat(r);
          const double u = base_field(lon, lat, rb) + month_field(lon, lat, rb) + seasonal;
          values[spec.index(r, c)] = rc.base + rc.scale * u;
        }
      }
      // Nodata along the northern padding where a whole row lies outside the area.
      if (spec.bounds.max_lat - rc.resolution_deg >= ab.max_lat)
        for (std::size_t c = 0; c < cols; ++c) values[spec.index(0, c)] = raster::kMissing;
      raster::RasterLayer layer(rc.variable, Temporal::of_month(o.year, m), spec, std::move(values));
      raster::write_raster(layer, root / "rasters" / raster_file_name(rc.variable, layer.temporal, o.format), o.format);
      ++summary.rasters_written;
    }
  }

  // Stations inside the area, away from its edges.
  std::vector<dataset::Station> stations;
  const double margin_lon = 0.05 * (ab.max_lon - ab.min_lon), margin_lat = 0.05 * (ab.max_lat - ab.min_lat);
  std::uniform_real_distribution<double> slon(ab.min_lon + margin_lon, ab.max_lon - margin_lon);
  std::uniform_real_distribution<double> slat(ab.min_lat + margin_lat, ab.max_lat - margin_lat);
  for (std::size_t i = 0; i < o.stations; ++i) {
    const std::string id = "s" + std::to_string(i + 1);
    const double lon = std::round(slon(rng) * 1e6) / 1e6;
    const double lat = std::round(slat(rng) * 1e6) / 1e6;
    stations.push_back({id, "Station " + std::to_string(i + 1), lon, lat});
  }

  // Coefficients in raw units and the features exactly as the dataset
  // builder sees them (read back from disk, harmonized, sampled).
  std::vector<Variable> features;
  std::map<Variable, double> coef;
  double intercept = kFixtureBaseline;
  for (const auto& rc : fixture_recipes()) {
    features.push_back(rc.variable);
    coef[rc.variable] = rc.weight / rc.scale;
    intercept -= coef[rc.variable] * rc.base;
  }
  const auto grid_spec = raster::GridSpec::from_bounds(ab, raster::kDefaultCellSizeM);
  const auto set = load_harmonized(root / "rasters", o.year, features, grid_spec);
  const auto table = dataset::extract_features(stations, set, dataset::months_of(o.year), features);

  std::vector<dataset::GroundObservation> obs;
  for (const auto& row : table.rows) {
    double y = intercept;
    for (std::size_t j = 0; j < features.size(); ++j) {
      if (raster::is_missing(row.features[j]))
        throw Error("fixture: station " + row.station_id + " sampled a nodata cell");
      y += coef[features[j]] * row.features[j];
    }
    y += o.noise_sigma * gauss(rng);
    if (y < 0.0) throw Error("fixture: generated a negative concentration; adjust the recipe");
    obs.push_back({row.station_id, row.year, row.month, o.pollutant, y});
  }

  files::write_atomic(root / "area.json", grid::to_json(area).dump(2) + "\n");
  files::write_atomic(root / "stations.csv", dataset::format_stations(stations));
  files::write_atomic(root / "ground_truth.csv", dataset::format_ground_truth(obs));

  json coefficients = json::object();
  for (auto v : features) coefficients[std::string(raster::name_of(v))] = coef[v];
  json resolutions = json::object();
  for (const auto& rc : fixture_recipes()) resolutions[std::string(raster::name_of(rc.variable))] = rc.resolution_deg;
  summary.manifest = {{"city", o.city},
                      {"year", o.year},
                      {"pollutant", o.pollutant},
                      {"seed", o.seed},
                      {"stations", o.stations},
                      {"raster_format", o.format == RasterFormat::geotiff ? "geotiff" : "ascii_grid"},
                      {"raster_resolution_deg", resolutions},
                      {"noise_sigma", o.noise_sigma},
                      {"intercept", intercept},
                      {"coefficients", coefficients}};
  files::write_atomic(root / "manifest.json", summary.manifest.dump(2) + "\n");

  const json catalog = {{"version", "fixture-" + std::to_string(o.seed)},
                        {"cities",
                         {{{"id", o.city},
                           {"name", o.name},
                           {"area", "area.json"},
                           {"years", {o.year}},
                           {"pollutants", {o.pollutant}},
                           {"stations", "stations.csv"},
                           {"ground_truth", "ground_truth.csv"},
                           {"rasters", "rasters"}}}}};
  files::write_atomic(root / "catalog.json", catalog.dump(2) + "\n");

  summary.stations = stations.size();
  summary.observations = obs.size();
  return summary;
}

}  // namespace aqs::pipeline
