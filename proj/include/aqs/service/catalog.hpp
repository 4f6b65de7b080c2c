#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include "aqs/core/error.hpp"
#include "aqs/core/files.hpp"
#include "aqs/core/text.hpp"
#include "aqs/grid/study_area.hpp"
#include "aqs/ml/hyperparams.hpp"
#include "aqs/raster/variable.hpp"

namespace aqs::service {

namespace fs = std::filesystem;
using nlohmann::json;

struct CityEntry {
  std::string id;
  std::string name;
  grid::StudyArea area;
  std::vector<int> years;
  std::vector<std::string> pollutants;  // lowercase codes
  fs::path stations;
  fs::path ground_truth;
  fs::path rasters;  // directory of <variable>_<YYYY>_<MM> files
};

// Read-only after loading. `version` is folded into every scenario id.
struct Catalog {
  std::string version;
  std::vector<CityEntry> cities;

  const CityEntry* find(const std::string& id) const {
    for (const auto& c : cities)
      if (c.id == id) return &c;
    return nullptr;
  }
};

// Paths are relative to the catalog file. Every referenced file must exist.
inline Catalog catalog_from_json(const json& j, const fs::path& base, const std::string& origin) {
  Catalog cat;
  try {
    cat.version = j.at("version").get<std::string>();
    const auto& cities = j.at("cities");
    if (!cities.is_array() || cities.empty()) throw DataError(origin + ": 'cities' must be a non-empty array");
    for (const auto& cj : cities) {
      CityEntry c;
      c.id = cj.at("id").get<std::string>();
      if (c.id.empty()) throw DataError(origin + ": city id must be non-empty");
      if (cat.find(c.id)) throw DataError(origin + ": duplicate city id '" + c.id + "'");
      c.name = cj.value("name", c.id);
      c.years = cj.at("years").get<std::vector<int>>();
      for (const auto& p : cj.at("pollutants").get<std::vector<std::string>>()) c.pollutants.push_back(text::lower(p));
      if (c.years.empty() || c.pollutants.empty())
        throw DataError(origin + ": city '" + c.id + "' needs at least one year and one pollutant");
      const auto resolve = [&](const char* key) {
        fs::path p = cj.at(key).get<std::string>();
        return p.is_absolute() ? p : base / p;
      };
      const fs::path area_path = resolve("area");
      c.stations = resolve("stations");
      c.ground_truth = resolve("ground_truth");
      c.rasters = resolve("rasters");
      for (const auto& f : {area_path, c.stations, c.ground_truth}) {
        if (!fs::is_regular_file(f)) throw DataError(origin + ": city '" + c.id + "' references missing file " + f.string());
      }
      if (!fs::is_directory(c.rasters))
        throw DataError(origin + ": city '" + c.id + "' references missing raster directory " + c.rasters.string());
      c.area = grid::load_study_area(area_path);
      cat.cities.push_back(std::move(c));
    }
  } catch (const json::exception& e) {
    throw DataError(origin + ": " + e.what());
  }
  return cat;
}

inline Catalog load_catalog(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw DataError("catalog file not found: " + path.string());
  json j;
  try {
    j = json::parse(files::read_text(path));
  } catch (const json::parse_error& e) {
    throw DataError(path.string() + ": invalid JSON: " + e.what());
  }
  return catalog_from_json(j, fs::absolute(path).parent_path(), path.string());
}

// Landing-page data: cities with years and pollutants, the input variables
// with units, and the model kinds.
inline json catalog_summary(const Catalog& cat) {
  json cities = json::array();
  for (const auto& c : cat.cities) {
    json area = grid::to_json(c.area);
    cities.push_back({{"id", c.id},
                      {"name", c.name},
                      {"years", c.years},
                      {"pollutants", c.pollutants},
                      {"bounds", area["bounds"]},
                      {"polygon", area.value("polygon", json(nullptr))}});
  }
  json variables = json::array();
  for (auto v : raster::input_variables()) {
    const auto& vi = raster::info(v);
    variables.push_back({{"id", std::string(vi.name)},
                         {"unit", std::string(vi.unit)},
                         {"static", raster::is_static(v)}});
  }
  json kinds = json::array();
  for (auto k : ml::kAllKinds) kinds.push_back(std::string(ml::name_of(k)));
  return {{"version", cat.version}, {"cities", cities}, {"variables", variables}, {"model_kinds", kinds}};
}

}  // namespace aqs::service
