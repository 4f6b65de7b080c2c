#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aqs/core/error.hpp"
#include "aqs/core/text.hpp"
#include "aqs/ml/grid_search.hpp"
#include "aqs/ml/metrics.hpp"
#include "aqs/ml/serialize.hpp"
#include "aqs/raster/variable.hpp"
#include "aqs/service/catalog.hpp"

namespace aqs::service {

struct ScenarioConfig {
  std::string city;
  int year = 0;
  std::string pollutant;
  ml::ModelKind kind = ml::ModelKind::linear;
  std::vector<raster::Variable> factors;  // deduplicated, in catalog order
  std::optional<ml::ParamGrid> grid;
  std::uint64_t seed = 42;
};

inline json to_json(const ScenarioConfig& c) {
  json factors = json::array();
  for (auto v : c.factors) factors.push_back(std::string(raster::name_of(v)));
  return {{"city", c.city},
          {"year", c.year},
          {"pollutant", c.pollutant},
          {"model", std::string(ml::name_of(c.kind))},
          {"factors", factors},
          {"grid", c.grid ? ml::grid_to_json(*c.grid) : json(nullptr)},
          {"seed", c.seed}};
}

// Parses and validates a request body against the catalog. Errors name the
// offending field. Missing "factors" means all seven inputs; missing "seed"
// means 42.
inline ScenarioConfig config_from_json(const json& j, const Catalog& cat) {
  if (!j.is_object()) throw FieldError("body", "scenario config must be a JSON object");
  static const char* const kKnown[] = {"city", "year", "pollutant", "model", "factors", "grid", "seed"};
  for (const auto& [key, _] : j.items()) {
    if (std::find_if(std::begin(kKnown), std::end(kKnown), [&](const char* k) { return key == k; }) ==
        std::end(kKnown))
      throw FieldError(key, "unknown field '" + key + "'");
  }
  const auto need = [&](const char* key) -> const json& {
    if (!j.contains(key) || j.at(key).is_null()) throw FieldError(key, std::string("missing field '") + key + "'");
    return j.at(key);
  };

  ScenarioConfig c;
  const auto& city = need("city");
  if (!city.is_string()) throw FieldError("city", "city must be a string");
  c.city = city.get<std::string>();
  const CityEntry* entry = cat.find(c.city);
  if (!entry) throw FieldError("city", "unknown city '" + c.city + "'");

  const auto& year = need("year");
  if (!year.is_number_integer()) throw FieldError("year", "year must be an integer");
  c.year = year.get<int>();
  if (std::find(entry->years.begin(), entry->years.end(), c.year) == entry->years.end())
    throw FieldError("year", "year " + std::to_string(c.year) + " is not available for city '" + c.city + "'");

  const auto& pol = need("pollutant");
  if (!pol.is_string()) throw FieldError("pollutant", "pollutant must be a string");
  c.pollutant = text::lower(pol.get<std::string>());
  if (std::find(entry->pollutants.begin(), entry->pollutants.end(), c.pollutant) == entry->pollutants.end())
    throw FieldError("pollutant", "pollutant '" + c.pollutant + "' is not available for city '" + c.city + "'");

  const auto& model = need("model");
  if (!model.is_string()) throw FieldError("model", "model must be a string");
  try {
    c.kind = ml::parse_kind(model.get<std::string>());
  } catch (const UsageError& e) {
    throw FieldError("model", e.what());
  }

  if (!j.contains("factors") || j.at("factors").is_null()) {
    c.factors = raster::input_variables();
  } else {
    const auto& f = j.at("factors");
    if (!f.is_array()) throw FieldError("factors", "factors must be an array of variable names");
    if (f.empty()) throw FieldError("factors", "at least one driving factor must be selected");
    std::vector<raster::Variable> chosen;
    for (const auto& name : f) {
      if (!name.is_string()) throw FieldError("factors", "factors must be an array of variable names");
      try {
        chosen.push_back(raster::parse_input_variable(name.get<std::string>()));
      } catch (const DataError& e) {
        throw FieldError("factors", e.what());
      }
    }
    for (auto v : raster::input_variables())
      if (std::find(chosen.begin(), chosen.end(), v) != chosen.end()) c.factors.push_back(v);
  }

  if (j.contains("grid") && !j.at("grid").is_null()) {
    try {
      c.grid = ml::grid_from_json(j.at("grid"));
      ml::expand_grid(ml::default_params(c.kind), *c.grid);
    } catch (const Error& e) {
      throw FieldError("grid", e.what());
    }
  }

  if (j.contains("seed") && !j.at("seed").is_null()) {
    const auto& s = j.at("seed");
    if (!s.is_number_unsigned()) throw FieldError("seed", "seed must be a non-negative integer");
    c.seed = s.get<std::uint64_t>();
  }
  return c;
}

// Content hash of the canonical config plus the dataset version.
inline std::string scenario_id(const ScenarioConfig& c, const std::string& dataset_version) {
  return text::fnv1a_hex(to_json(c).dump() + "\n" + dataset_version);
}

enum class Status { pending, running, done, failed };

inline const char* name_of(Status s) {
  switch (s) {
    case Status::pending: return "pending";
    case Status::running: return "running";
    case Status::done: return "done";
    case Status::failed: return "failed";
  }
  return "?";
}

inline Status parse_status(const std::string& s) {
  for (auto st : {Status::pending, Status::running, Status::done, Status::failed})
    if (s == name_of(st)) return st;
  throw DataError("unknown scenario status '" + s + "'");
}

struct Timings {
  double dataset_s = 0.0;
  double train_s = 0.0;
  double surface_s = 0.0;
  double total_s = 0.0;
};

struct ScenarioResult {
  std::string id;
  ScenarioConfig config;
  std::string dataset_version;
  Status status = Status::pending;
  std::string reason;  // set when failed
  std::optional<ml::MetricsReport> metrics;
  std::optional<ml::HyperParams> hyperparameters;  // chosen (after any grid search)
  std::size_t rows = 0;
  std::size_t rows_removed = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  Timings timings;
};

inline json to_json(const ScenarioResult& r) {
  json j = {{"id", r.id},
            {"config", to_json(r.config)},
            {"dataset_version", r.dataset_version},
            {"status", name_of(r.status)}};
  if (r.status == Status::failed) j["reason"] = r.reason;
  if (r.status == Status::done) {
    j["metrics"] = ml::to_json(*r.metrics);
    j["hyperparameters"] = ml::to_json(*r.hyperparameters);
    j["dataset"] = {{"rows", r.rows}, {"rows_removed", r.rows_removed}, {"n_train", r.n_train}, {"n_test", r.n_test}};
    j["timings"] = {{"dataset_s", r.timings.dataset_s},
                    {"train_s", r.timings.train_s},
                    {"surface_s", r.timings.surface_s},
                    {"total_s", r.timings.total_s}};
    j["model"] = "/api/scenarios/" + r.id + "/model";
    j["surface"] = "/api/scenarios/" + r.id + "/surface";
  }
  return j;
}

// Inverse of to_json for persisted (done) results.
inline ScenarioResult result_from_json(const json& j, const Catalog& cat) {
  try {
    ScenarioResult r;
    r.id = j.at("id").get<std::string>();
    r.config = config_from_json(j.at("config"), cat);
    r.dataset_version = j.at("dataset_version").get<std::string>();
    r.status = parse_status(j.at("status").get<std::string>());
    if (r.status == Status::failed) r.reason = j.at("reason").get<std::string>();
    if (r.status == Status::done) {
      r.metrics = ml::metrics_from_json(j.at("metrics"));
      r.hyperparameters = ml::params_from_json(r.config.kind, j.at("hyperparameters"));
      const auto& d = j.at("dataset");
      r.rows = d.at("rows").get<std::size_t>();
      r.rows_removed = d.at("rows_removed").get<std::size_t>();
      r.n_train = d.at("n_train").get<std::size_t>();
      r.n_test = d.at("n_test").get<std::size_t>();
      const auto& t = j.at("timings");
      r.timings = {t.at("dataset_s").get<double>(), t.at("train_s").get<double>(), t.at("surface_s").get<double>(),
                   t.at("total_s").get<double>()};
    }
    return r;
  } catch (const json::exception& e) {
    throw DataError(std::string("scenario result JSON: ") + e.what());
  } catch (const UsageError& e) {
    throw DataError(std::string("scenario result JSON: ") + e.what());
  }
}

}  // namespace aqs::service
