#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "aqs/core/error.hpp"
#include "aqs/raster/geo.hpp"
#include "aqs/raster/variable.hpp"

namespace aqs::raster {

// Missing cells are quiet NaN inside the library; the file sentinel is only
// used when reading and writing.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) { return std::isnan(v); }

struct Temporal {
  enum class Kind { month, year, static_ };
  Kind kind = Kind::static_;
  int year = 0;
  int month = 0;

  static Temporal of_month(int y, int m) {
    if (m < 1 || m > 12) throw DataError("month out of range: " + std::to_string(m));
    return {Kind::month, y, m};
  }
  static Temporal of_year(int y) { return {Kind::year, y, 0}; }
  static Temporal fixed() { return {Kind::static_, 0, 0}; }

  std::string str() const {
    switch (kind) {
      case Kind::month:
        return std::to_string(year) + "-" + (month < 10 ? "0" : "") + std::to_string(month);
      case Kind::year:
        return std::to_string(year);
      case Kind::static_:
        return "static";
    }
    return "?";
  }
  bool operator==(const Temporal&) const = default;
};

struct RasterLayer {
  Variable variable = Variable::tvcd;
  std::string unit;
  Temporal temporal;
  GridSpec grid;
  std::vector<double> values;  // row-major, north to south
  double nodata = -9999.0;     // sentinel used on disk

  RasterLayer() = default;
  RasterLayer(Variable v, Temporal t, GridSpec g, std::vector<double> vals, double nodata_value = -9999.0)
      : variable(v), unit(unit_of(v)), temporal(t), grid(g), values(std::move(vals)), nodata(nodata_value) {
    validate();
  }

  void validate() const {
    if (grid.rows == 0 || grid.cols == 0) throw DataError("raster grid must be non-empty");
    if (values.size() != grid.size())
      throw DataError("raster has " + std::to_string(values.size()) + " values, grid needs " +
                      std::to_string(grid.size()));
    if (unit != unit_of(variable))
      throw DataError("unit '" + unit + "' does not match catalog unit for " +
                      std::string(name_of(variable)));
  }

  double at(std::size_t row, std::size_t col) const { return values[grid.index(row, col)]; }
};

}  // namespace aqs::raster
