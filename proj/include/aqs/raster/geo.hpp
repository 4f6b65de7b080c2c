#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>

#include "aqs/core/error.hpp"

namespace aqs::raster {

// Local planar approximation used for every meter <-> degree conversion.
inline constexpr double kMetersPerDegreeLat = 111320.0;
inline constexpr double kDefaultCellSizeM = 3000.0;

inline double meters_per_degree_lon(double latitude_deg) {
  return kMetersPerDegreeLat * std::cos(latitude_deg * std::numbers::pi / 180.0);
}

struct GeoBounds {
  double min_lon = 0.0;
  double max_lon = 0.0;
  double min_lat = 0.0;
  double max_lat = 0.0;

  void validate() const {
    if (!(min_lon < max_lon) || !(min_lat < max_lat))
      throw DataError("degenerate bounds: require min_lon < max_lon and min_lat < max_lat");
    if (min_lon < -180.0 || max_lon > 180.0 || min_lat < -90.0 || max_lat > 90.0)
      throw DataError("bounds outside WGS84 range");
  }

  double mid_lat() const { return 0.5 * (min_lat + max_lat); }
  double width_m() const { return (max_lon - min_lon) * meters_per_degree_lon(mid_lat()); }
  double height_m() const { return (max_lat - min_lat) * kMetersPerDegreeLat; }

  bool contains(double lon, double lat) const {
    return lon >= min_lon && lon <= max_lon && lat >= min_lat && lat <= max_lat;
  }
  bool overlaps(const GeoBounds& o) const {
    return min_lon < o.max_lon && o.min_lon < max_lon && min_lat < o.max_lat && o.min_lat < max_lat;
  }
  bool operator==(const GeoBounds&) const = default;
};

// Row-major lattice of cells that exactly tile `bounds`, row 0 at the north
// edge and column 0 at the west edge.
struct GridSpec {
  GeoBounds bounds;
  double cell_size_m = kDefaultCellSizeM;
  std::size_t rows = 1;
  std::size_t cols = 1;

  // rows = ceil(NS extent / cell), cols = ceil(EW extent / cell).
  static GridSpec from_bounds(const GeoBounds& b, double cell_size_m = kDefaultCellSizeM) {
    b.validate();
    if (!(cell_size_m > 0.0)) throw DataError("cell size must be positive");
    const auto count = [&](double extent_m) {
      const double ratio = extent_m / cell_size_m;
      auto n = static_cast<std::size_t>(std::ceil(ratio - 1e-9));
      return n == 0 ? std::size_t{1} : n;
    };
    return GridSpec{b, cell_size_m, count(b.height_m()), count(b.width_m())};
  }

  // Grid from a north-west origin and cell sizes in degrees (file georeferencing).
  static GridSpec from_origin(double west, double north, double cell_width_deg,
                              double cell_height_deg, std::size_t rows, std::size_t cols) {
    if (rows == 0 || cols == 0) throw DataError("grid must have at least one row and column");
    if (!(cell_width_deg > 0.0) || !(cell_height_deg > 0.0))
      throw DataError("cell size must be positive");
    GeoBounds b{west, west + cell_width_deg * static_cast<double>(cols),
                north - cell_height_deg * static_cast<double>(rows), north};
    return GridSpec{b, cell_height_deg * kMetersPerDegreeLat, rows, cols};
  }

  std::size_t size() const { return rows * cols; }
  double cell_width_deg() const { return (bounds.max_lon - bounds.min_lon) / static_cast<double>(cols); }
  double cell_height_deg() const { return (bounds.max_lat - bounds.min_lat) / static_cast<double>(rows); }
  double center_lon(std::size_t col) const {
    return bounds.min_lon + (static_cast<double>(col) + 0.5) * cell_width_deg();
  }
  double center_lat(std::size_t row) const {
    return bounds.max_lat - (static_cast<double>(row) + 0.5) * cell_height_deg();
  }
  std::size_t index(std::size_t row, std::size_t col) const { return row * cols + col; }

  bool operator==(const GridSpec&) const = default;
};

}  // namespace aqs::raster
