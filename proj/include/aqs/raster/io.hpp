#pragma once

#include <filesystem>
#include <string>

#include "aqs/core/error.hpp"
#include "aqs/core/text.hpp"
#include "aqs/raster/ascii_grid.hpp"
#include "aqs/raster/geotiff.hpp"

namespace aqs::raster {

enum class RasterFormat { geotiff, ascii_grid };

inline RasterFormat parse_format(const std::string& s) {
  if (s == "geotiff" || s == "tif" || s == "tiff") return RasterFormat::geotiff;
  if (s == "ascii_grid" || s == "asc") return RasterFormat::ascii_grid;
  throw UsageError("unknown raster format '" + s + "' (expected geotiff or ascii_grid)");
}

inline const char* extension(RasterFormat f) { return f == RasterFormat::geotiff ? ".tif" : ".asc"; }

inline RasterFormat format_from_path(const std::filesystem::path& path) {
  const auto ext = text::lower(path.extension().string());
  if (ext == ".tif" || ext == ".tiff") return RasterFormat::geotiff;
  if (ext == ".asc") return RasterFormat::ascii_grid;
  throw DataError(path.string() + ": unrecognised raster extension '" + ext + "'");
}

inline RasterLayer read_raster(const std::filesystem::path& path, RasterFormat format, Variable variable,
                               Temporal temporal) {
  return format == RasterFormat::geotiff ? geotiff::read(path, variable, temporal)
                                         : ascii_grid::read(path, variable, temporal);
}

inline RasterLayer read_raster(const std::filesystem::path& path, Variable variable, Temporal temporal) {
  return read_raster(path, format_from_path(path), variable, temporal);
}

inline void write_raster(const RasterLayer& layer, const std::filesystem::path& path, RasterFormat format) {
  if (format == RasterFormat::geotiff) geotiff::write(layer, path);
  else ascii_grid::write(layer, path);
}

}  // namespace aqs::raster
