#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "aqs/core/error.hpp"
#include "aqs/dataset/builder.hpp"
#include "aqs/dataset/observation.hpp"
#include "aqs/dataset/station.hpp"
#include "aqs/dataset/table.hpp"
#include "aqs/grid/lattice.hpp"
#include "aqs/grid/study_area.hpp"
#include "aqs/grid/surface.hpp"
#include "aqs/ml/grid_search.hpp"
#include "aqs/ml/metrics.hpp"
#include "aqs/ml/model.hpp"
#include "aqs/pipeline/rasters.hpp"

namespace aqs::pipeline {

inline std::vector<Variable> all_inputs() { return raster::input_variables(); }

// Stations outside the area are a data error: the table would silently lose them.
inline void check_stations_in_area(const std::vector<dataset::Station>& stations, const grid::StudyArea& area) {
  for (const auto& s : stations) {
    if (!area.bounds.contains(s.lon, s.lat))
      throw DataError("station '" + s.id + "' lies outside the bounds of area '" + area.id + "'");
  }
}

struct DatasetRequest {
  grid::StudyArea area;
  std::vector<dataset::Station> stations;
  std::vector<dataset::GroundObservation> observations;
  fs::path raster_dir;
  int year = 0;
  std::string pollutant;
  std::vector<Variable> features = all_inputs();
  double cell_size_m = raster::kDefaultCellSizeM;
};

struct DatasetResult {
  raster::GridSpec grid;           // harmonized 3 km grid over the area
  dataset::RasterSet rasters;      // every layer resampled onto `grid`
  dataset::TrainingTable joined;   // before cleaning
  dataset::CleanResult cleaned;
};

// Harmonizes the rasters onto the area grid, samples them at the stations
// for the twelve months of the year, joins targets and drops incomplete rows.
inline DatasetResult build_dataset(const DatasetRequest& req) {
  if (req.features.empty()) throw UsageError("at least one driving factor is required");
  check_stations_in_area(req.stations, req.area);
  DatasetResult out;
  out.grid = raster::GridSpec::from_bounds(req.area.bounds, req.cell_size_m);
  out.rasters = load_harmonized(req.raster_dir, req.year, req.features, out.grid);
  const auto months = dataset::months_of(req.year);
  out.joined = dataset::join_targets(dataset::extract_features(req.stations, out.rasters, months, req.features),
                                     req.observations, req.pollutant);
  out.cleaned = dataset::clean(out.joined);
  return out;
}

struct TrainRequest {
  ml::ModelKind kind = ml::ModelKind::linear;
  std::vector<Variable> factors;  // empty = every column of the table
  std::uint64_t seed = 42;
  std::optional<ml::ParamGrid> grid;  // overrides the kind's default grid
  double train_fraction = 0.7;
  std::size_t cv_folds = 5;
};

struct TrainOutcome {
  ml::TrainedModel model;
  ml::MetricsReport test_metrics;
  std::optional<ml::GridSearchResult> search;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
};

// Random forest and gradient boosting are always tuned (default grid unless
// one is supplied); linear and SVR are tuned only with an explicit grid.
inline std::optional<ml::ParamGrid> effective_grid(ml::ModelKind kind, const std::optional<ml::ParamGrid>& requested) {
  if (requested) return requested;
  if (kind == ml::ModelKind::random_forest || kind == ml::ModelKind::gradient_boosting) return ml::default_grid(kind);
  return std::nullopt;
}

inline TrainOutcome train_on_table(const dataset::TrainingTable& table, const TrainRequest& req) {
  const auto factors = req.factors.empty() ? table.feature_names : req.factors;
  const auto selected = dataset::select_features(table, factors);
  for (const auto& r : selected.rows) {
    if (!r.complete()) throw DataError("dataset contains missing values; clean it before training");
  }
  auto [train_t, test_t] = dataset::split(selected, req.train_fraction, req.seed);
  const std::size_t p = factors.size();
  const ml::Matrix x_train(train_t.size(), p, train_t.matrix());
  const auto y_train = train_t.targets();

  TrainOutcome out;
  out.n_train = train_t.size();
  out.n_test = test_t.size();
  ml::HyperParams params = ml::default_params(req.kind);
  if (const auto g = effective_grid(req.kind, req.grid)) {
    out.search = ml::grid_search(req.kind, *g, x_train, y_train, req.cv_folds, req.seed);
    params = out.search->best;
  }
  out.model = ml::train(req.kind, x_train, y_train, params, req.seed, selected.feature_strings());
  const ml::Matrix x_test(test_t.size(), p, test_t.matrix());
  out.test_metrics = ml::evaluate(test_t.targets(), ml::predict(out.model, x_test));
  return out;
}

// Lattice over the area, features from the composites in model order, and
// predictions for every unmasked point.
inline grid::PredictionSurface predict_area(const ml::TrainedModel& model, const grid::StudyArea& area,
                                            const grid::Composites& composites, const std::string& scenario_id,
                                            const std::string& pollutant,
                                            double spacing_m = grid::kDefaultSpacingM) {
  const auto lattice = grid::generate_grid(area, spacing_m);
  const auto im = grid::build_inference_matrix(lattice.points, composites, grid::model_variables(model), &area);
  return grid::predict_surface(model, lattice, im, scenario_id, pollutant);
}

}  // namespace aqs::pipeline
