#pragma once

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "aqs/core/error.hpp"
#include "aqs/core/parallel.hpp"
#include "aqs/grid/lattice.hpp"
#include "aqs/grid/study_area.hpp"
#include "aqs/ml/model.hpp"
#include "aqs/raster/layer.hpp"
#include "aqs/raster/ops.hpp"

namespace aqs::grid {

using nlohmann::json;

struct SurfacePoint {
  double lon = 0.0;
  double lat = 0.0;
  double value = raster::kMissing;  // NaN when masked or a feature is missing
};

struct PredictionSurface {
  std::string scenario_id;
  std::string pollutant;
  std::string unit = "µg/m³";
  double spacing_m = kDefaultSpacingM;
  std::size_t rows = 0;
  std::size_t cols = 0;
  GeoBounds bounds;
  std::vector<SurfacePoint> points;  // row-major from the north-west

  std::size_t missing_count() const {
    std::size_t n = 0;
    for (const auto& p : points) n += raster::is_missing(p.value) ? 1 : 0;
    return n;
  }
};

struct InferenceMatrix {
  ml::Matrix x;                       // missing rows hold zeros
  std::vector<std::uint8_t> missing;  // 1 = row is masked
  std::size_t masked_count() const {
    std::size_t n = 0;
    for (auto m : missing) n += m;
    return n;
  }
};

using Composites = std::map<raster::Variable, raster::RasterLayer>;

// Row i samples every feature's composite at point i. Nodata, points outside
// a composite and points outside the area polygon (when given) mark the row
// missing.
inline InferenceMatrix build_inference_matrix(const std::vector<GridPoint>& points, const Composites& composites,
                                              const std::vector<raster::Variable>& features,
                                              const StudyArea* mask = nullptr) {
  std::vector<const raster::RasterLayer*> layers;
  for (auto v : features) {
    auto it = composites.find(v);
    if (it == composites.end())
      throw DataError("no yearly composite for variable '" + std::string(raster::name_of(v)) + "'");
    layers.push_back(&it->second);
  }
  InferenceMatrix out{ml::Matrix(points.size(), features.size()), std::vector<std::uint8_t>(points.size(), 0)};
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    bool missing = mask && mask->has_polygon() && !point_in_polygon(mask->polygon, p.lon, p.lat);
    for (std::size_t j = 0; j < layers.size() && !missing; ++j) {
      if (!layers[j]->grid.bounds.contains(p.lon, p.lat)) {
        missing = true;
        break;
      }
      const double v = raster::sample_at(*layers[j], p.lon, p.lat);
      if (raster::is_missing(v)) missing = true;
      else out.x(i, j) = v;
    }
    if (missing) {
      out.missing[i] = 1;
      for (std::size_t j = 0; j < features.size(); ++j) out.x(i, j) = 0.0;
    }
  }
  return out;
}

// Resolves a model's feature names to variables, rejecting non-inputs.
inline std::vector<raster::Variable> model_variables(const ml::TrainedModel& model) {
  std::vector<raster::Variable> out;
  for (const auto& name : model.feature_names) out.push_back(raster::parse_input_variable(name));
  return out;
}

inline PredictionSurface predict_surface(const ml::TrainedModel& model, const Lattice& lattice,
                                         const InferenceMatrix& im, const std::string& scenario_id,
                                         const std::string& pollutant) {
  if (im.x.cols != model.arity())
    throw DataError("model expects " + std::to_string(model.arity()) + " features, inference matrix has " +
                    std::to_string(im.x.cols));
  if (im.x.rows != lattice.size() || im.missing.size() != lattice.size())
    throw DataError("inference matrix does not match the lattice size");

  std::vector<std::size_t> live;
  for (std::size_t i = 0; i < im.missing.size(); ++i)
    if (!im.missing[i]) live.push_back(i);

  std::vector<double> predicted(live.size());
  constexpr std::size_t kBatch = 256;
  const std::size_t batches = (live.size() + kBatch - 1) / kBatch;
  parallel_for(batches, [&](std::size_t b) {
    const std::size_t lo = b * kBatch, hi = std::min(live.size(), lo + kBatch);
    std::vector<std::size_t> idx(live.begin() + static_cast<std::ptrdiff_t>(lo),
                                 live.begin() + static_cast<std::ptrdiff_t>(hi));
    const auto part = ml::predict(model, im.x.select_rows(idx));
    std::copy(part.begin(), part.end(), predicted.begin() + static_cast<std::ptrdiff_t>(lo));
  });

  PredictionSurface s;
  s.scenario_id = scenario_id;
  s.pollutant = pollutant;
  s.spacing_m = lattice.spacing_m;
  s.rows = lattice.rows;
  s.cols = lattice.cols;
  s.bounds = lattice.bounds;
  s.points.resize(lattice.size());
  for (std::size_t i = 0; i < lattice.size(); ++i) s.points[i] = {lattice.points[i].lon, lattice.points[i].lat};
  for (std::size_t k = 0; k < live.size(); ++k) s.points[live[k]].value = predicted[k];
  return s;
}

// Lossless document used for persistence (doubles round-trip exactly).
inline json to_json(const PredictionSurface& s) {
  json lon = json::array(), lat = json::array(), value = json::array();
  for (const auto& p : s.points) {
    lon.push_back(p.lon);
    lat.push_back(p.lat);
    value.push_back(raster::is_missing(p.value) ? json(nullptr) : json(p.value));
  }
  return {{"scenario_id", s.scenario_id}, {"pollutant", s.pollutant}, {"unit", s.unit},
          {"spacing_m", s.spacing_m},     {"rows", s.rows},           {"cols", s.cols},
          {"bounds", bounds_to_json(s.bounds)}, {"lon", lon}, {"lat", lat}, {"value", value}};
}

inline PredictionSurface surface_from_json(const json& j) {
  try {
    PredictionSurface s;
    s.scenario_id = j.at("scenario_id").get<std::string>();
    s.pollutant = j.at("pollutant").get<std::string>();
    s.unit = j.at("unit").get<std::string>();
    s.spacing_m = j.at("spacing_m").get<double>();
    s.rows = j.at("rows").get<std::size_t>();
    s.cols = j.at("cols").get<std::size_t>();
    s.bounds = bounds_from_json(j.at("bounds"));
    const auto& lon = j.at("lon");
    const auto& lat = j.at("lat");
    const auto& value = j.at("value");
    if (lon.size() != s.rows * s.cols || lat.size() != lon.size() || value.size() != lon.size())
      throw DataError("surface JSON: point arrays do not match rows x cols");
    s.points.resize(lon.size());
    for (std::size_t i = 0; i < lon.size(); ++i) {
      s.points[i].lon = lon[i].get<double>();
      s.points[i].lat = lat[i].get<double>();
      s.points[i].value = value[i].is_null() ? raster::kMissing : value[i].get<double>();
    }
    return s;
  } catch (const json::exception& e) {
    throw DataError(std::string("surface JSON: ") + e.what());
  }
}

}  // namespace aqs::grid
