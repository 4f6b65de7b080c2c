#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "aqs/core/error.hpp"
#include "aqs/core/parallel.hpp"
#include "aqs/grid/surface.hpp"
#include "aqs/raster/layer.hpp"

namespace aqs::grid {

// Nadaraya-Watson smoothing of the surface's non-missing points with a
// Gaussian kernel, evaluated at every lattice point. Weights are shifted by
// the nearest point's log-weight so tiny bandwidths do not underflow; each
// output is a convex combination of the inputs.
inline raster::RasterLayer kde_smooth(const PredictionSurface& s, double bandwidth_m) {
  if (!(bandwidth_m > 0.0) || !std::isfinite(bandwidth_m)) throw UsageError("KDE bandwidth must be positive");
  if (s.rows == 0 || s.cols == 0 || s.points.size() != s.rows * s.cols)
    throw DataError("KDE: surface is not a complete lattice");
  std::vector<SurfacePoint> live;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& p : s.points) {
    if (raster::is_missing(p.value)) continue;
    live.push_back(p);
    lo = std::min(lo, p.value);
    hi = std::max(hi, p.value);
  }
  if (live.empty()) throw DataError("KDE: surface has no non-missing points");

  const double mx = raster::meters_per_degree_lon(s.bounds.mid_lat());
  const double my = raster::kMetersPerDegreeLat;
  const double inv2h2 = 1.0 / (2.0 * bandwidth_m * bandwidth_m);
  std::vector<double> out(s.points.size());
  parallel_for(s.rows, [&](std::size_t r) {
    std::vector<double> logw(live.size());
    for (std::size_t c = 0; c < s.cols; ++c) {
      const auto& q = s.points[r * s.cols + c];
      double top = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < live.size(); ++k) {
        const double dx = (live[k].lon - q.lon) * mx, dy = (live[k].lat - q.lat) * my;
        logw[k] = -(dx * dx + dy * dy) * inv2h2;
        top = std::max(top, logw[k]);
      }
      double num = 0.0, den = 0.0;
      for (std::size_t k = 0; k < live.size(); ++k) {
        const double w = std::exp(logw[k] - top);
        num += w * live[k].value;
        den += w;
      }
      out[r * s.cols + c] = std::clamp(num / den, lo, hi);
    }
  });

  // Lattice points are cell centers, so the raster cells are spacing-sized
  // boxes around them.
  const auto& nw = s.points.front();
  const double dlon = s.cols > 1 ? (s.points[1].lon - nw.lon) : s.spacing_m / mx;
  const double dlat = s.rows > 1 ? (nw.lat - s.points[s.cols].lat) : s.spacing_m / my;
  auto grid = raster::GridSpec::from_origin(nw.lon - 0.5 * dlon, nw.lat + 0.5 * dlat, dlon, dlat, s.rows, s.cols);
  grid.cell_size_m = s.spacing_m;
  return raster::RasterLayer(raster::Variable::ground_pollutant, raster::Temporal::fixed(), grid, std::move(out));
}

}  // namespace aqs::grid
