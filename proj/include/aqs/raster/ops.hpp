#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "aqs/core/error.hpp"
#include "aqs/raster/errors.hpp"
#include "aqs/raster/layer.hpp"

namespace aqs::raster {

namespace detail {

// Running mean: exact for constant inputs. Result clamped to the observed
// range so rounding never leaves [min, max].
struct MeanAccumulator {
  double mean = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  std::size_t n = 0;

  void add(double v) {
    ++n;
    mean += (v - mean) / static_cast<double>(n);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  double value() const { return n == 0 ? kMissing : std::clamp(mean, lo, hi); }
};

}  // namespace detail

// Nearest cell to (lon, lat). Ties go to the smaller row, then smaller column.
inline std::size_t nearest_cell(const GridSpec& g, double lon, double lat) {
  const auto axis = [](double frac, std::size_t n) {
    // frac is the position in cell units measured from the first center.
    double k = std::ceil(frac - 0.5);
    if (k < 0.0) k = 0.0;
    const double top = static_cast<double>(n - 1);
    if (k > top) k = top;
    return static_cast<std::size_t>(k);
  };
  const double fx = (lon - g.bounds.min_lon) / g.cell_width_deg() - 0.5;
  const double fy = (g.bounds.max_lat - lat) / g.cell_height_deg() - 0.5;
  return g.index(axis(fy, g.rows), axis(fx, g.cols));
}

// Value of the cell whose center is nearest the point; NaN for nodata.
inline double sample_at(const RasterLayer& layer, double lon, double lat) {
  if (!layer.grid.bounds.contains(lon, lat)) {
    throw OutOfBounds("point (" + std::to_string(lon) + ", " + std::to_string(lat) + ") outside " +
                      std::string(name_of(layer.variable)) + " raster bounds");
  }
  return layer.values[nearest_cell(layer.grid, lon, lat)];
}

// Aggregates `layer` onto `target`: each target cell is the mean of the
// non-nodata source cells whose centers fall inside it. A target cell that
// contains no source center at all (source coarser than target) takes the
// source cell under its own center; if it contains only nodata centers it
// stays nodata.
inline RasterLayer resample_to_grid(const RasterLayer& layer, const GridSpec& target) {
  const auto& src = layer.grid;
  if (!src.bounds.overlaps(target.bounds))
    throw DataError("resample: " + std::string(name_of(layer.variable)) +
                    " raster does not overlap the target grid");

  std::vector<detail::MeanAccumulator> acc(target.size());
  std::vector<unsigned char> covered(target.size(), 0);
  const double tw = target.cell_width_deg();
  const double th = target.cell_height_deg();
  for (std::size_t r = 0; r < src.rows; ++r) {
    const double lat = src.center_lat(r);
    if (lat < target.bounds.min_lat || lat >= target.bounds.max_lat) continue;
    auto tr = static_cast<std::size_t>(std::floor((target.bounds.max_lat - lat) / th));
    tr = std::min(tr, target.rows - 1);
    for (std::size_t c = 0; c < src.cols; ++c) {
      const double lon = src.center_lon(c);
      if (lon < target.bounds.min_lon || lon >= target.bounds.max_lon) continue;
      auto tc = static_cast<std::size_t>(std::floor((lon - target.bounds.min_lon) / tw));
      tc = std::min(tc, target.cols - 1);
      const std::size_t ti = target.index(tr, tc);
      covered[ti] = 1;
      const double v = layer.values[src.index(r, c)];
      if (!is_missing(v)) acc[ti].add(v);
    }
  }

  std::vector<double> out(target.size(), kMissing);
  for (std::size_t r = 0; r < target.rows; ++r) {
    for (std::size_t c = 0; c < target.cols; ++c) {
      const std::size_t ti = target.index(r, c);
      if (covered[ti]) {
        out[ti] = acc[ti].value();
      } else {
        const double lon = target.center_lon(c);
        const double lat = target.center_lat(r);
        if (src.bounds.contains(lon, lat)) out[ti] = layer.values[nearest_cell(src, lon, lat)];
      }
    }
  }
  RasterLayer result = layer;
  result.grid = target;
  result.values = std::move(out);
  return result;
}

// Per-cell mean across layers ignoring nodata. Input order does not affect
// the result: each cell's values are sorted before averaging.
inline RasterLayer temporal_composite(std::span<const RasterLayer> layers) {
  if (layers.empty()) throw DataError("temporal composite needs at least one layer");
  const RasterLayer& first = layers.front();
  for (const auto& l : layers) {
    if (l.variable != first.variable || l.unit != first.unit)
      throw DataError("temporal composite: mixed variables (" + std::string(name_of(first.variable)) + " vs " +
                      std::string(name_of(l.variable)) + ")");
    if (!(l.grid == first.grid)) throw DataError("temporal composite: layers do not share a grid");
  }

  std::vector<double> out(first.values.size());
  std::vector<double> cell;
  cell.reserve(layers.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    cell.clear();
    for (const auto& l : layers)
      if (!is_missing(l.values[i])) cell.push_back(l.values[i]);
    std::sort(cell.begin(), cell.end());
    detail::MeanAccumulator acc;
    for (double v : cell) acc.add(v);
    out[i] = acc.value();
  }

  RasterLayer result = first;
  result.values = std::move(out);
  bool all_months_same_year = true;
  for (const auto& l : layers) {
    if (l.temporal.kind != Temporal::Kind::month || l.temporal.year != first.temporal.year)
      all_months_same_year = false;
  }
  if (all_months_same_year) result.temporal = Temporal::of_year(first.temporal.year);
  return result;
}

}  // namespace aqs::raster
