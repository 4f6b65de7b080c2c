#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "aqs/core/error.hpp"
#include "aqs/grid/study_area.hpp"
#include "aqs/raster/geo.hpp"

namespace aqs::grid {

inline constexpr double kDefaultSpacingM = 3000.0;

struct GridPoint {
  double lon = 0.0;
  double lat = 0.0;
};

// Uniform lattice of rows x cols points, row-major from the north-west.
struct Lattice {
  GeoBounds bounds;
  double spacing_m = kDefaultSpacingM;
  std::size_t rows = 0;
  std::size_t cols = 0;
  double dlon = 0.0;  // spacing in degrees
  double dlat = 0.0;
  std::vector<GridPoint> points;

  std::size_t size() const { return points.size(); }
};

// Per axis n = max(1, floor(extent / spacing)); the n points are the
// centers of n spacing-sized cells, and that block is centered in the
// bounds. When the extent is an exact multiple of the spacing the cells tile
// the bounds.
inline Lattice generate_grid(const GeoBounds& bounds, double spacing_m = kDefaultSpacingM) {
  bounds.validate();
  if (!(spacing_m > 0.0) || !std::isfinite(spacing_m)) throw DataError("grid spacing must be positive");
  const auto count = [&](double extent_m) {
    const double n = std::floor(extent_m / spacing_m + 1e-9);
    return n < 1.0 ? std::size_t{1} : static_cast<std::size_t>(n);
  };
  Lattice g;
  g.bounds = bounds;
  g.spacing_m = spacing_m;
  g.rows = count(bounds.height_m());
  g.cols = count(bounds.width_m());
  g.dlon = spacing_m / raster::meters_per_degree_lon(bounds.mid_lat());
  g.dlat = spacing_m / raster::kMetersPerDegreeLat;
  const double lon_offset = 0.5 * ((bounds.max_lon - bounds.min_lon) - static_cast<double>(g.cols) * g.dlon);
  const double lat_offset = 0.5 * ((bounds.max_lat - bounds.min_lat) - static_cast<double>(g.rows) * g.dlat);
  const double west = bounds.min_lon + lon_offset;
  const double north = bounds.max_lat - lat_offset;
  g.points.reserve(g.rows * g.cols);
  for (std::size_t r = 0; r < g.rows; ++r) {
    const double lat = std::clamp(north - (static_cast<double>(r) + 0.5) * g.dlat, bounds.min_lat, bounds.max_lat);
    for (std::size_t c = 0; c < g.cols; ++c) {
      const double lon = std::clamp(west + (static_cast<double>(c) + 0.5) * g.dlon, bounds.min_lon, bounds.max_lon);
      g.points.push_back({lon, lat});
    }
  }
  return g;
}

inline Lattice generate_grid(const StudyArea& area, double spacing_m = kDefaultSpacingM) {
  return generate_grid(area.bounds, spacing_m);
}

}  // namespace aqs::grid
