#pragma once

#include <nlohmann/json.hpp>

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "aqs/core/error.hpp"
#include "aqs/core/files.hpp"
#include "aqs/raster/geo.hpp"

namespace aqs::grid {

using nlohmann::json;
using raster::GeoBounds;

using LonLat = std::array<double, 2>;

struct StudyArea {
  std::string id;
  std::string name;
  GeoBounds bounds;
  std::vector<LonLat> polygon;  // closed ring (first == last) or empty

  bool has_polygon() const { return !polygon.empty(); }
};

namespace detail {

inline double cross(const LonLat& o, const LonLat& a, const LonLat& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

inline bool on_segment(const LonLat& p, const LonLat& a, const LonLat& b) {
  return std::min(a[0], b[0]) <= p[0] && p[0] <= std::max(a[0], b[0]) && std::min(a[1], b[1]) <= p[1] &&
         p[1] <= std::max(a[1], b[1]);
}

inline bool segments_intersect(const LonLat& p1, const LonLat& p2, const LonLat& q1, const LonLat& q2) {
  const double d1 = cross(q1, q2, p1), d2 = cross(q1, q2, p2);
  const double d3 = cross(p1, p2, q1), d4 = cross(p1, p2, q2);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  return (d1 == 0 && on_segment(p1, q1, q2)) || (d2 == 0 && on_segment(p2, q1, q2)) ||
         (d3 == 0 && on_segment(q1, p1, p2)) || (d4 == 0 && on_segment(q2, p1, p2));
}

}  // namespace detail

// Ring must be closed, have at least three distinct vertices, stay inside
// the bounds and not cross itself.
inline void validate_polygon(const std::vector<LonLat>& ring, const GeoBounds& bounds) {
  if (ring.size() < 4) throw DataError("polygon needs at least 3 vertices plus the closing vertex");
  if (ring.front() != ring.back()) throw DataError("polygon ring is not closed (first vertex != last vertex)");
  for (const auto& p : ring) {
    if (!bounds.contains(p[0], p[1]))
      throw DataError("polygon vertex (" + std::to_string(p[0]) + ", " + std::to_string(p[1]) +
                      ") lies outside the area bounds");
  }
  const std::size_t n = ring.size() - 1;  // edge count
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (detail::segments_intersect(ring[i], ring[i + 1], ring[j], ring[j + 1]))
        throw DataError("polygon ring is self-intersecting (edges " + std::to_string(i) + " and " +
                        std::to_string(j) + ")");
    }
  }
}

// Even-odd ray casting; points exactly on an edge may fall either way.
inline bool point_in_polygon(const std::vector<LonLat>& ring, double lon, double lat) {
  bool inside = false;
  for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
    const auto& a = ring[i];
    const auto& b = ring[j];
    if ((a[1] > lat) != (b[1] > lat)) {
      const double x = (b[0] - a[0]) * (lat - a[1]) / (b[1] - a[1]) + a[0];
      if (lon < x) inside = !inside;
    }
  }
  return inside;
}

inline bool contains(const StudyArea& area, double lon, double lat) {
  if (!area.bounds.contains(lon, lat)) return false;
  return !area.has_polygon() || point_in_polygon(area.polygon, lon, lat);
}

inline json bounds_to_json(const GeoBounds& b) {
  return {{"min_lon", b.min_lon}, {"min_lat", b.min_lat}, {"max_lon", b.max_lon}, {"max_lat", b.max_lat}};
}

inline GeoBounds bounds_from_json(const json& j) {
  GeoBounds b{j.at("min_lon").get<double>(), j.at("max_lon").get<double>(), j.at("min_lat").get<double>(),
              j.at("max_lat").get<double>()};
  b.validate();
  return b;
}

inline json to_json(const StudyArea& a) {
  json j = {{"id", a.id}, {"name", a.name}, {"bounds", bounds_to_json(a.bounds)}};
  if (a.has_polygon()) j["polygon"] = a.polygon;
  return j;
}

inline StudyArea study_area_from_json(const json& j, const std::string& source = "study area") {
  try {
    StudyArea a;
    a.id = j.at("id").get<std::string>();
    a.name = j.value("name", a.id);
    if (a.id.empty()) throw DataError(source + ": id must be non-empty");
    a.bounds = bounds_from_json(j.at("bounds"));
    if (j.contains("polygon") && !j.at("polygon").is_null()) {
      a.polygon = j.at("polygon").get<std::vector<LonLat>>();
      validate_polygon(a.polygon, a.bounds);
    }
    return a;
  } catch (const json::exception& e) {
    throw DataError(source + ": " + e.what());
  } catch (const DataError& e) {
    const std::string msg = e.what();
    if (msg.rfind(source, 0) == 0) throw;
    throw DataError(source + ": " + msg);
  }
}

inline StudyArea load_study_area(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(files::read_text(path));
  } catch (const json::parse_error& e) {
    throw DataError(path.string() + ": invalid JSON: " + e.what());
  }
  return study_area_from_json(j, path.string());
}

}  // namespace aqs::grid
