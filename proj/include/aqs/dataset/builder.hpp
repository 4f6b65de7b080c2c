#pragma once

#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "aqs/core/error.hpp"
#include "aqs/dataset/observation.hpp"
#include "aqs/dataset/station.hpp"
#include "aqs/dataset/table.hpp"
#include "aqs/raster/layer.hpp"
#include "aqs/raster/ops.hpp"

namespace aqs::dataset {

struct YearMonth {
  int year = 0;
  int month = 0;
  auto operator<=>(const YearMonth&) const = default;
};

inline std::vector<YearMonth> months_of(int year) {
  std::vector<YearMonth> out;
  for (int m = 1; m <= 12; ++m) out.push_back({year, m});
  return out;
}

// Driving-factor layers keyed by variable and time. Lookups for a month fall
// back to the variable's yearly layer, then to its static layer.
class RasterSet {
 public:
  void add(raster::RasterLayer layer) {
    const auto key = key_of(layer.variable, layer.temporal);
    layers_.insert_or_assign(key, std::move(layer));
  }

  const raster::RasterLayer* find(Variable v, YearMonth ym) const {
    using K = raster::Temporal::Kind;
    for (auto k : {Key{v, K::month, ym.year, ym.month}, Key{v, K::year, ym.year, 0}, Key{v, K::static_, 0, 0}}) {
      auto it = layers_.find(k);
      if (it != layers_.end()) return &it->second;
    }
    return nullptr;
  }

  std::size_t size() const { return layers_.size(); }

 private:
  using Key = std::tuple<Variable, raster::Temporal::Kind, int, int>;
  static Key key_of(Variable v, const raster::Temporal& t) {
    using K = raster::Temporal::Kind;
    switch (t.kind) {
      case K::month: return {v, K::month, t.year, t.month};
      case K::year: return {v, K::year, t.year, 0};
      case K::static_: return {v, K::static_, 0, 0};
    }
    return {v, t.kind, 0, 0};
  }
  std::map<Key, raster::RasterLayer> layers_;
};

// One row per (station, month) with feature j sampled from variable j's
// layer for that month. Nodata cells and stations outside a layer's bounds
// give missing features; targets are left missing.
inline TrainingTable extract_features(const std::vector<Station>& stations, const RasterSet& rasters,
                                      const std::vector<YearMonth>& months, const std::vector<Variable>& features) {
  for (auto v : features) {
    if (raster::info(v).role != raster::Role::input)
      throw DataError("'" + std::string(raster::name_of(v)) + "' is not an input variable");
  }
  TrainingTable table;
  table.feature_names = features;
  std::vector<const raster::RasterLayer*> layers(features.size());
  for (const auto& ym : months) {
    for (std::size_t j = 0; j < features.size(); ++j) {
      layers[j] = rasters.find(features[j], ym);
      if (!layers[j])
        throw DataError("no " + std::string(raster::name_of(features[j])) + " raster for " +
                        std::to_string(ym.year) + "-" + std::to_string(ym.month));
    }
    for (const auto& s : stations) {
      TableRow row;
      row.station_id = s.id;
      row.year = ym.year;
      row.month = ym.month;
      row.features.reserve(features.size());
      for (const auto* layer : layers) {
        row.features.push_back(layer->grid.bounds.contains(s.lon, s.lat) ? raster::sample_at(*layer, s.lon, s.lat)
                                                                          : kMissing);
      }
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

// Attaches the matching observation's concentration to each row. Rows with
// no observation keep a missing target.
inline TrainingTable join_targets(const TrainingTable& table, const std::vector<GroundObservation>& observations,
                                  const std::string& pollutant) {
  std::map<std::tuple<std::string, int, int>, double> by_key;
  const auto wanted = text::lower(pollutant);
  for (const auto& o : observations) {
    if (o.pollutant != wanted) continue;
    if (!by_key.emplace(std::tuple{o.station_id, o.year, o.month}, o.concentration).second) {
      throw DataError("duplicate observation for station '" + o.station_id + "' " + std::to_string(o.year) + "-" +
                      std::to_string(o.month) + " (" + o.pollutant + ")");
    }
  }
  TrainingTable out = table;
  for (auto& r : out.rows) {
    auto it = by_key.find({r.station_id, r.year, r.month});
    r.target = it == by_key.end() ? kMissing : it->second;
  }
  return out;
}

}  // namespace aqs::dataset
