#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "aqs/core/csv.hpp"
#include "aqs/core/error.hpp"
#include "aqs/core/files.hpp"
#include "aqs/core/text.hpp"
#include "aqs/grid/surface.hpp"

namespace aqs::grid {

inline constexpr int kDefaultLegendBins = 9;

enum class SurfaceFormat { geojson, csv };

inline SurfaceFormat parse_surface_format(const std::string& s) {
  if (s == "geojson") return SurfaceFormat::geojson;
  if (s == "csv") return SurfaceFormat::csv;
  throw UsageError("unknown surface format '" + s + "' (expected geojson or csv)");
}

struct LegendSpec {
  enum class Mode { dynamic, fixed };
  Mode mode = Mode::dynamic;
  double min = 0.0;  // fixed mode only
  double max = 0.0;
  int bins = kDefaultLegendBins;

  static LegendSpec dynamic(int bins = kDefaultLegendBins) { return {Mode::dynamic, 0.0, 0.0, bins}; }
  static LegendSpec fixed(double lo, double hi, int bins = kDefaultLegendBins) { return {Mode::fixed, lo, hi, bins}; }
};

// Equal-width bins over [min, max]. Bin k covers (min + k*w, min + (k+1)*w];
// min itself and anything below fall in bin 0, anything above max in the top
// bin.
struct LegendScale {
  double min = 0.0;
  double max = 1.0;
  int bins = kDefaultLegendBins;

  double width() const { return (max - min) / bins; }

  int bin(double v) const {
    const double k = std::ceil((v - min) / width()) - 1.0;
    if (!(k > 0.0)) return 0;
    if (k >= bins - 1) return bins - 1;
    return static_cast<int>(k);
  }

  std::vector<double> edges() const {
    std::vector<double> e;
    for (int k = 0; k <= bins; ++k) e.push_back(k == bins ? max : min + k * width());
    return e;
  }
};

// Dynamic legends span the surface's non-missing values; a constant (or
// empty) surface with value v widens to [v - 1, v + 1].
inline LegendScale resolve_legend(const PredictionSurface& s, const LegendSpec& spec) {
  if (spec.bins < 1) throw UsageError("legend needs at least one bin");
  if (spec.mode == LegendSpec::Mode::fixed) {
    if (!std::isfinite(spec.min) || !std::isfinite(spec.max) || !(spec.min < spec.max))
      throw UsageError("fixed legend requires finite min < max (got " + text::format_double(spec.min) + ", " +
                       text::format_double(spec.max) + ")");
    return {spec.min, spec.max, spec.bins};
  }
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& p : s.points) {
    if (raster::is_missing(p.value)) continue;
    lo = std::min(lo, p.value);
    hi = std::max(hi, p.value);
  }
  if (lo > hi) lo = hi = 0.0;
  if (lo == hi) return {lo - 1.0, hi + 1.0, spec.bins};
  return {lo, hi, spec.bins};
}

// FeatureCollection of Point features; missing points are omitted.
inline json to_geojson(const PredictionSurface& s, const LegendScale& legend) {
  json features = json::array();
  for (const auto& p : s.points) {
    if (raster::is_missing(p.value)) continue;
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "Point"}, {"coordinates", {p.lon, p.lat}}}},
                        {"properties", {{"value", p.value}, {"bin", legend.bin(p.value)}}}});
  }
  return {{"type", "FeatureCollection"},
          {"features", features},
          {"scenario_id", s.scenario_id},
          {"pollutant", s.pollutant},
          {"unit", s.unit},
          {"spacing_m", s.spacing_m},
          {"rows", s.rows},
          {"cols", s.cols},
          {"legend", {{"min", legend.min}, {"max", legend.max}, {"bins", legend.bins}, {"edges", legend.edges()}}}};
}

// lon,lat,value with 6-decimal coordinates and shortest round-trip values;
// missing values are empty. One row per lattice point.
inline std::string to_csv(const PredictionSurface& s) {
  std::string out = "lon,lat,value\n";
  for (const auto& p : s.points) {
    out += text::format_fixed(p.lon, 6);
    out += ',';
    out += text::format_fixed(p.lat, 6);
    out += ',';
    if (!raster::is_missing(p.value)) out += text::format_double(p.value);
    out += '\n';
  }
  return out;
}

inline std::vector<SurfacePoint> parse_surface_csv(const std::string& content, const std::string& source) {
  const auto doc = csv::parse(content, source);
  csv::require_header(doc, {"lon", "lat", "value"}, source);
  std::vector<SurfacePoint> out;
  for (const auto& [line, fields] : doc.records) {
    const auto lon = text::parse_double(fields[0]);
    const auto lat = text::parse_double(fields[1]);
    if (!lon || !lat) throw DataError(source + ":" + std::to_string(line) + ": unparsable coordinate");
    SurfacePoint p{*lon, *lat, raster::kMissing};
    if (!text::trim(fields[2]).empty()) {
      const auto v = text::parse_double(fields[2]);
      if (!v) throw DataError(source + ":" + std::to_string(line) + ": unparsable value");
      p.value = *v;
    }
    out.push_back(p);
  }
  return out;
}

inline std::string export_surface(const PredictionSurface& s, SurfaceFormat format, const LegendSpec& legend) {
  if (format == SurfaceFormat::csv) return to_csv(s);
  return to_geojson(s, resolve_legend(s, legend)).dump() + "\n";
}

inline void write_surface(const PredictionSurface& s, const std::filesystem::path& path, SurfaceFormat format,
                          const LegendSpec& legend) {
  files::write_atomic(path, export_surface(s, format, legend));
}

}  // namespace aqs::grid
