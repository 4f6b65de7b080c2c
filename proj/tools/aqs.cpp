// aqs: command-line front end for the air-quality sandbox pipeline.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "aqs/core/error.hpp"
#include "aqs/core/files.hpp"
#include "aqs/core/text.hpp"
#include "aqs/dataset/observation.hpp"
#include "aqs/dataset/station.hpp"
#include "aqs/dataset/table.hpp"
#include "aqs/grid/export.hpp"
#include "aqs/grid/kde.hpp"
#include "aqs/grid/study_area.hpp"
#include "aqs/ml/serialize.hpp"
#include "aqs/pipeline/fixture.hpp"
#include "aqs/pipeline/rasters.hpp"
#include "aqs/pipeline/workflow.hpp"
#include "aqs/raster/io.hpp"
#include "aqs/service/config.hpp"
#include "aqs/service/http_api.hpp"
#include "aqs/service/service.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace aqs;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

bool g_json = false;

// Human summary lines unless --json, in which case one JSON object.
void report(const json& summary, const std::vector<std::string>& lines) {
  if (g_json) {
    std::cout << summary.dump(2) << "\n";
  } else {
    for (const auto& l : lines) std::cout << l << "\n";
  }
}

std::vector<raster::Variable> parse_factor_list(const std::string& list) {
  std::vector<raster::Variable> out;
  for (const auto& item : text::split(list, ',')) {
    const auto name = std::string(text::trim(item));
    if (name.empty()) continue;
    raster::Variable v;
    try {
      v = raster::parse_input_variable(name);
    } catch (const DataError& e) {
      throw UsageError(std::string(e.what()) + " (inputs: tvcd, rainfall, temperature, wind_speed, population, "
                                               "elevation, night_lights)");
    }
    if (std::find(out.begin(), out.end(), v) != out.end()) throw UsageError("factor '" + name + "' listed twice");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError("--factors must name at least one driving factor");
  return out;
}

json read_json_file(const fs::path& p) {
  try {
    return json::parse(files::read_text(p));
  } catch (const json::parse_error& e) {
    throw DataError(p.string() + ": invalid JSON: " + e.what());
  }
}

std::string fmt4(double v) { return text::format_fixed(v, 4); }

// ---------------------------------------------------------------- build-dataset

struct BuildArgs {
  std::string city;
  int year = 0;
  std::string pollutant;
  fs::path stations, rasters, out;
  std::optional<fs::path> ground_truth, area;
  std::string factors;
  double cell_size = raster::kDefaultCellSizeM;
};

void run_build(const BuildArgs& a) {
  const fs::path city_dir = fs::absolute(a.rasters).lexically_normal().parent_path();
  const fs::path gt_path = a.ground_truth.value_or(city_dir / "ground_truth.csv");
  const fs::path area_path = a.area.value_or(city_dir / "area.json");
  std::error_code ec;
  if (!fs::is_directory(a.rasters, ec)) throw DataError("raster directory not found: " + a.rasters.string());

  pipeline::DatasetRequest req;
  req.area = grid::load_study_area(area_path);
  if (req.area.id != a.city)
    throw DataError("area file " + area_path.string() + " describes city '" + req.area.id + "', not '" + a.city + "'");
  req.stations = dataset::load_stations(a.stations);
  const auto truth = dataset::load_ground_truth(gt_path);
  req.observations = truth.observations;
  req.raster_dir = a.rasters;
  req.year = a.year;
  req.pollutant = text::lower(a.pollutant);
  if (!a.factors.empty()) req.features = parse_factor_list(a.factors);
  req.cell_size_m = a.cell_size;
  if (!(a.cell_size > 0.0)) throw UsageError("--cell-size must be positive");

  const auto ds = pipeline::build_dataset(req);
  dataset::write_table(ds.cleaned.table, a.out);

  json features = json::array();
  for (const auto& f : ds.cleaned.table.feature_strings()) features.push_back(f);
  report({{"command", "build-dataset"},
          {"out", a.out.string()},
          {"city", a.city},
          {"year", a.year},
          {"pollutant", req.pollutant},
          {"features", features},
          {"grid", {{"rows", ds.grid.rows}, {"cols", ds.grid.cols}, {"cell_size_m", ds.grid.cell_size_m}}},
          {"rows_total", ds.joined.size()},
          {"rows_written", ds.cleaned.table.size()},
          {"rows_removed", ds.cleaned.removed},
          {"observations_skipped_empty", truth.skipped_empty}},
         {"wrote " + a.out.string(),
          "rows written: " + std::to_string(ds.cleaned.table.size()) + ", removed (missing values): " +
              std::to_string(ds.cleaned.removed),
          "harmonized grid: " + std::to_string(ds.grid.rows) + " x " + std::to_string(ds.grid.cols) + " cells"});
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  fs::path dataset;
  std::string model;
  std::string factors;
  std::uint64_t seed = 42;
  std::optional<fs::path> grid;
  fs::path out = ".";
  double train_fraction = 0.7;
  std::size_t cv_folds = 5;
};

void run_train(const TrainArgs& a) {
  pipeline::TrainRequest req;
  req.kind = ml::parse_kind(a.model);
  req.seed = a.seed;
  req.train_fraction = a.train_fraction;
  req.cv_folds = a.cv_folds;
  if (!a.factors.empty()) req.factors = parse_factor_list(a.factors);
  if (a.grid) {
    const auto grid_json = read_json_file(*a.grid);  // unreadable file is a data error
    try {
      req.grid = ml::grid_from_json(grid_json);
      ml::expand_grid(ml::default_params(req.kind), *req.grid);
    } catch (const DataError& e) {
      throw UsageError(std::string("--grid: ") + e.what());
    }
  }
  const auto table = dataset::load_table(a.dataset);
  const auto out = pipeline::train_on_table(table, req);

  fs::create_directories(a.out);
  const fs::path model_path = a.out / "model.json";
  const fs::path metrics_path = a.out / "metrics.json";
  files::write_atomic(model_path, ml::to_json(out.model).dump(2) + "\n");
  json metrics = ml::to_json(out.test_metrics);
  metrics["model"] = std::string(ml::name_of(req.kind));
  metrics["seed"] = a.seed;
  metrics["n_train"] = out.n_train;
  metrics["n_test"] = out.n_test;
  metrics["hyperparameters"] = ml::to_json(out.model.params);
  files::write_atomic(metrics_path, metrics.dump(2) + "\n");
  if (out.search) files::write_atomic(a.out / "grid_search.json", ml::to_json(*out.search).dump(2) + "\n");

  const auto& m = out.test_metrics;
  const std::string mape = m.mape ? text::format_fixed(*m.mape, 2) + " %" : "n/a";
  json summary = {{"command", "train"},
                  {"model", std::string(ml::name_of(req.kind))},
                  {"model_path", model_path.string()},
                  {"metrics_path", metrics_path.string()},
                  {"n_train", out.n_train},
                  {"n_test", out.n_test},
                  {"r2", m.r2},
                  {"mae", m.mae},
                  {"mse", m.mse},
                  {"mape", m.mape ? json(*m.mape) : json(nullptr)},
                  {"rmse", m.rmse},
                  {"hyperparameters", ml::to_json(out.model.params)}};
  std::vector<std::string> lines = {
      std::string(ml::name_of(req.kind)) + ": trained on " + std::to_string(out.n_train) + " rows, tested on " +
          std::to_string(out.n_test),
      "R2   " + fmt4(m.r2),
      "MAE  " + fmt4(m.mae) + " µg/m³",
      "MSE  " + fmt4(m.mse) + " (µg/m³)²",
      "MAPE " + mape,
      "RMSE " + fmt4(m.rmse) + " µg/m³",
  };
  if (out.search) lines.push_back("grid search best: " + ml::to_json(out.search->best).dump());
  lines.push_back("wrote " + model_path.string() + " and " + metrics_path.string());
  report(summary, lines);
}

// ---------------------------------------------------------------- predict-grid

struct PredictArgs {
  fs::path model, area, composites, out;
  std::string format = "geojson";
  std::string legend = "dynamic";
  std::optional<double> min, max;
  int bins = grid::kDefaultLegendBins;
  double spacing = grid::kDefaultSpacingM;
  std::string scenario_id;
  std::string pollutant = "no2";
};

void run_predict(const PredictArgs& a) {
  const auto format = grid::parse_surface_format(a.format);
  grid::LegendSpec legend;
  if (a.legend == "dynamic") {
    legend = grid::LegendSpec::dynamic(a.bins);
  } else if (a.legend == "fixed") {
    if (!a.min || !a.max) throw UsageError("--legend fixed requires --min and --max");
    legend = grid::LegendSpec::fixed(*a.min, *a.max, a.bins);
  } else {
    throw UsageError("--legend must be dynamic or fixed");
  }
  if (!(a.spacing > 0.0)) throw UsageError("--spacing must be positive");

  const auto model = ml::model_from_json(read_json_file(a.model));
  const auto area = grid::load_study_area(a.area);
  const auto variables = grid::model_variables(model);
  const auto composites = pipeline::load_composites(a.composites, variables);
  const auto surface = pipeline::predict_area(model, area, composites, a.scenario_id, a.pollutant, a.spacing);
  if (format == grid::SurfaceFormat::geojson) grid::resolve_legend(surface, legend);  // validate before writing
  grid::write_surface(surface, a.out, format, legend);

  report({{"command", "predict-grid"},
          {"out", a.out.string()},
          {"format", a.format},
          {"rows", surface.rows},
          {"cols", surface.cols},
          {"points", surface.points.size()},
          {"missing", surface.missing_count()}},
         {"wrote " + a.out.string(),
          "lattice " + std::to_string(surface.rows) + " x " + std::to_string(surface.cols) + " = " +
              std::to_string(surface.points.size()) + " points, " + std::to_string(surface.missing_count()) +
              " missing"});
}

// ---------------------------------------------------------------- composite

struct CompositeArgs {
  fs::path rasters, area, out;
  int year = 0;
  std::string factors;
  std::string format = "geotiff";
  double cell_size = raster::kDefaultCellSizeM;
};

void run_composite(const CompositeArgs& a) {
  const auto format = raster::parse_format(a.format);
  if (!(a.cell_size > 0.0)) throw UsageError("--cell-size must be positive");
  const auto variables = a.factors.empty() ? pipeline::all_inputs() : parse_factor_list(a.factors);
  const auto area = grid::load_study_area(a.area);
  const auto spec = raster::GridSpec::from_bounds(area.bounds, a.cell_size);
  const auto set = pipeline::load_harmonized(a.rasters, a.year, variables, spec);
  const auto composites = pipeline::yearly_composites(set, a.year, variables);
  pipeline::write_composites(composites, a.out, format);
  json written = json::array();
  for (const auto& [v, _] : composites) written.push_back(std::string(raster::name_of(v)));
  report({{"command", "composite"}, {"out", a.out.string()}, {"year", a.year}, {"variables", written},
          {"rows", spec.rows}, {"cols", spec.cols}},
         {"wrote " + std::to_string(composites.size()) + " yearly composites to " + a.out.string()});
}

// ---------------------------------------------------------------- kde-smooth

struct KdeArgs {
  fs::path surface, out;
  double bandwidth = 0.0;
  double spacing = grid::kDefaultSpacingM;
};

// Rebuilds the lattice shape from a surface CSV: rows are runs of equal lat.
grid::PredictionSurface surface_from_csv(const fs::path& path, double spacing) {
  auto points = grid::parse_surface_csv(files::read_text(path), path.string());
  if (points.empty()) throw DataError(path.string() + ": surface has no points");
  grid::PredictionSurface s;
  s.spacing_m = spacing;
  s.rows = 1;
  for (std::size_t i = 1; i < points.size(); ++i)
    if (points[i].lat != points[i - 1].lat) ++s.rows;
  if (points.size() % s.rows != 0) throw DataError(path.string() + ": points do not form a rectangular lattice");
  s.cols = points.size() / s.rows;
  double lo_lon = points[0].lon, hi_lon = lo_lon, lo_lat = points[0].lat, hi_lat = lo_lat;
  for (const auto& p : points) {
    lo_lon = std::min(lo_lon, p.lon);
    hi_lon = std::max(hi_lon, p.lon);
    lo_lat = std::min(lo_lat, p.lat);
    hi_lat = std::max(hi_lat, p.lat);
  }
  s.bounds = {lo_lon, hi_lon, lo_lat, hi_lat};
  s.points = std::move(points);
  return s;
}

void run_kde(const KdeArgs& a) {
  if (!(a.bandwidth > 0.0)) throw UsageError("--bandwidth must be positive");
  const auto surface = surface_from_csv(a.surface, a.spacing);
  const auto layer = grid::kde_smooth(surface, a.bandwidth);
  raster::write_raster(layer, a.out, raster::format_from_path(a.out));
  report({{"command", "kde-smooth"}, {"out", a.out.string()}, {"rows", layer.grid.rows}, {"cols", layer.grid.cols},
          {"bandwidth_m", a.bandwidth}},
         {"wrote " + a.out.string() + " (" + std::to_string(layer.grid.rows) + " x " +
          std::to_string(layer.grid.cols) + ")"});
}

// ---------------------------------------------------------------- make-fixture

struct FixtureArgs {
  fs::path out;
  pipeline::FixtureOptions opt;
  std::string format = "geotiff";
};

void run_fixture(FixtureArgs a) {
  a.opt.format = raster::parse_format(a.format);
  const auto s = pipeline::make_fixture(a.out, a.opt);
  report({{"command", "make-fixture"},
          {"out", a.out.string()},
          {"rasters", s.rasters_written},
          {"stations", s.stations},
          {"observations", s.observations},
          {"manifest", s.manifest}},
         {"wrote fixture city '" + a.opt.city + "' to " + a.out.string(),
          std::to_string(s.rasters_written) + " rasters, " + std::to_string(s.stations) + " stations, " +
              std::to_string(s.observations) + " observations"});
}

// ---------------------------------------------------------------- serve

void run_serve(const fs::path& config_path) {
  const auto cfg = service::load_config(config_path);
  auto catalog = service::load_catalog(cfg.catalog);

  // Block termination signals before any thread starts; one thread waits on them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  service::ScenarioService svc(std::move(catalog), cfg.store_dir, cfg.workers);
  for (const auto& w : svc.restore_report().warnings) std::cerr << "warning: quarantined " << w << "\n";

  httplib::Server server;
  service::mount_api(server, svc);
  if (cfg.static_dir) {
    if (!server.set_mount_point("/", cfg.static_dir->string()))
      throw UsageError("static_dir does not exist: " + cfg.static_dir->string());
  }
  const int port = cfg.port == 0 ? server.bind_to_any_port(cfg.host) : (server.bind_to_port(cfg.host, cfg.port) ? cfg.port : -1);
  if (port < 0) throw Error("cannot bind " + cfg.host + ":" + std::to_string(cfg.port));

  std::thread waiter([&server, signals] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  report({{"command", "serve"},
          {"host", cfg.host},
          {"port", port},
          {"workers", cfg.workers},
          {"store_dir", cfg.store_dir.string()},
          {"scenarios_restored", svc.scenario_count()}},
         {"listening on http://" + cfg.host + ":" + std::to_string(port) + " (" + std::to_string(svc.scenario_count()) +
          " scenarios restored)"});
  std::cout.flush();
  server.listen_after_bind();
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  svc.stop();
}

int fail(int code, const std::string& message) {
  std::cerr << "error: " << message << "\n";
  if (g_json) std::cout << json{{"error", message}, {"exit_code", code}}.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Air-quality sandbox: datasets, models and prediction surfaces from rasters and station data"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "aqs 1.0.0");

  BuildArgs build;
  auto* cmd_build = app.add_subcommand("build-dataset", "Sample rasters at stations and join ground truth");
  cmd_build->add_option("--city", build.city, "City id (must match the area file)")->required();
  cmd_build->add_option("--year", build.year, "Year to build")->required();
  cmd_build->add_option("--pollutant", build.pollutant, "Pollutant code, e.g. no2")->required();
  cmd_build->add_option("--stations", build.stations, "Stations CSV (id,name,lon,lat)")->required();
  cmd_build->add_option("--rasters", build.rasters, "Directory of <variable>_<YYYY>_<MM> rasters")->required();
  cmd_build->add_option("--out", build.out, "Training table CSV to write")->required();
  cmd_build->add_option("--ground-truth", build.ground_truth, "Ground truth CSV (default: <rasters>/../ground_truth.csv)");
  cmd_build->add_option("--area", build.area, "Study area JSON (default: <rasters>/../area.json)");
  cmd_build->add_option("--factors", build.factors, "Comma-separated driving factors (default: all seven)");
  cmd_build->add_option("--cell-size", build.cell_size, "Harmonized grid cell size in meters");

  TrainArgs train;
  auto* cmd_train = app.add_subcommand("train", "Train and evaluate a model on a training table");
  cmd_train->add_option("--dataset", train.dataset, "Training table CSV")->required();
  cmd_train->add_option("--model", train.model, "linear | random_forest | svr | gradient_boosting")->required();
  cmd_train->add_option("--factors", train.factors, "Comma-separated factors (default: every dataset column)");
  cmd_train->add_option("--seed", train.seed, "Random seed");
  cmd_train->add_option("--grid", train.grid, "Hyperparameter grid JSON file {name: [values]}");
  cmd_train->add_option("--out", train.out, "Directory for model.json and metrics.json");
  cmd_train->add_option("--train-fraction", train.train_fraction, "Share of rows used for training");
  cmd_train->add_option("--cv-folds", train.cv_folds, "Cross-validation folds for grid search");

  PredictArgs predict;
  auto* cmd_predict = app.add_subcommand("predict-grid", "Predict a surface over the study area lattice");
  cmd_predict->add_option("--model", predict.model, "Model JSON")->required();
  cmd_predict->add_option("--area", predict.area, "Study area JSON")->required();
  cmd_predict->add_option("--composites", predict.composites, "Directory of <variable> yearly composites")->required();
  cmd_predict->add_option("--out", predict.out, "Output file")->required();
  cmd_predict->add_option("--format", predict.format, "geojson | csv");
  cmd_predict->add_option("--legend", predict.legend, "dynamic | fixed");
  cmd_predict->add_option("--min", predict.min, "Fixed legend minimum");
  cmd_predict->add_option("--max", predict.max, "Fixed legend maximum");
  cmd_predict->add_option("--bins", predict.bins, "Legend bin count");
  cmd_predict->add_option("--spacing", predict.spacing, "Lattice spacing in meters");
  cmd_predict->add_option("--scenario-id", predict.scenario_id, "Id recorded in the surface");
  cmd_predict->add_option("--pollutant", predict.pollutant, "Pollutant code recorded in the surface");

  CompositeArgs composite;
  auto* cmd_composite = app.add_subcommand("composite", "Write yearly composites on the harmonized area grid");
  cmd_composite->add_option("--rasters", composite.rasters, "Directory of monthly rasters")->required();
  cmd_composite->add_option("--year", composite.year, "Year")->required();
  cmd_composite->add_option("--area", composite.area, "Study area JSON")->required();
  cmd_composite->add_option("--out", composite.out, "Output directory")->required();
  cmd_composite->add_option("--factors", composite.factors, "Comma-separated factors (default: all seven)");
  cmd_composite->add_option("--format", composite.format, "geotiff | ascii_grid");
  cmd_composite->add_option("--cell-size", composite.cell_size, "Grid cell size in meters");

  KdeArgs kde;
  auto* cmd_kde = app.add_subcommand("kde-smooth", "Gaussian kernel smoothing of a surface CSV (batch only)");
  cmd_kde->add_option("--surface", kde.surface, "Surface CSV from predict-grid")->required();
  cmd_kde->add_option("--bandwidth", kde.bandwidth, "Kernel bandwidth in meters")->required();
  cmd_kde->add_option("--out", kde.out, "Output raster (.tif or .asc)")->required();
  cmd_kde->add_option("--spacing", kde.spacing, "Lattice spacing in meters");

  FixtureArgs fixture;
  auto* cmd_fixture = app.add_subcommand("make-fixture", "Generate a synthetic city dataset");
  cmd_fixture->add_option("--out", fixture.out, "Output directory")->required();
  cmd_fixture->add_option("--seed", fixture.opt.seed, "Random seed");
  cmd_fixture->add_option("--stations", fixture.opt.stations, "Number of stations");
  cmd_fixture->add_option("--city", fixture.opt.city, "City id");
  cmd_fixture->add_option("--name", fixture.opt.name, "City display name");
  cmd_fixture->add_option("--year", fixture.opt.year, "Year");
  cmd_fixture->add_option("--raster-format", fixture.format, "geotiff | ascii_grid");
  cmd_fixture->add_option("--noise-sigma", fixture.opt.noise_sigma, "Target noise standard deviation (µg/m³)");

  fs::path serve_config;
  auto* cmd_serve = app.add_subcommand("serve", "Run the scenario HTTP service");
  cmd_serve->add_option("--config", serve_config, "Service config JSON")->required();

  for (auto* sub : {cmd_build, cmd_train, cmd_predict, cmd_composite, cmd_kde, cmd_fixture, cmd_serve})
    sub->add_flag("--json", g_json, "Machine-readable JSON output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*cmd_build) run_build(build);
    else if (*cmd_train) run_train(train);
    else if (*cmd_predict) run_predict(predict);
    else if (*cmd_composite) run_composite(composite);
    else if (*cmd_kde) run_kde(kde);
    else if (*cmd_fixture) run_fixture(fixture);
    else if (*cmd_serve) run_serve(serve_config);
    return kOk;
  } catch (const UsageError& e) {
    return fail(kUsage, e.what());
  } catch (const DataError& e) {
    return fail(kData, e.what());
  } catch (const NotFound& e) {
    return fail(kData, e.what());
  } catch (const ConvergenceError& e) {
    return fail(kData, e.what());
  } catch (const std::exception& e) {
    return fail(kInternal, e.what());
  }
}
