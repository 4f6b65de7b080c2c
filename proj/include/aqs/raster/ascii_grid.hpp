#pragma once

#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "aqs/core/files.hpp"
#include "aqs/core/text.hpp"
#include "aqs/raster/errors.hpp"
#include "aqs/raster/layer.hpp"

namespace aqs::raster {

// ESRI ASCII grid. Header keys: ncols, nrows, xllcorner, yllcorner, cellsize,
// NODATA_value; values follow row-major north to south. Non-square cells are
// written with the GDAL `dx`/`dy` keys in place of `cellsize`.
namespace ascii_grid {

inline RasterLayer parse(const std::string& content, const std::string& source, Variable variable,
                         Temporal temporal) {
  std::istringstream in(content);
  std::map<std::string, std::string> header;
  std::string token;
  std::streampos data_start = 0;
  for (;;) {
    const auto pos = in.tellg();
    if (!(in >> token)) break;
    const bool is_key = !token.empty() && (std::isalpha(static_cast<unsigned char>(token[0])) != 0);
    if (!is_key) {
      data_start = pos;
      break;
    }
    std::string value;
    if (!(in >> value)) throw RasterReadError(source, "header key '" + token + "' has no value");
    header[text::lower(token)] = value;
  }

  const auto number = [&](const std::string& key) -> std::optional<double> {
    auto it = header.find(key);
    if (it == header.end()) return std::nullopt;
    auto v = text::parse_double(it->second);
    if (!v) throw RasterReadError(source, "header key '" + key + "' is not a number");
    return v;
  };

  const auto ncols = number("ncols");
  const auto nrows = number("nrows");
  if (!ncols) throw RasterReadError(source, "missing header key 'ncols'");
  if (!nrows) throw RasterReadError(source, "missing header key 'nrows'");
  if (*ncols < 1 || *nrows < 1 || *ncols != std::floor(*ncols) || *nrows != std::floor(*nrows))
    throw RasterReadError(source, "ncols/nrows must be positive integers");
  const auto cols = static_cast<std::size_t>(*ncols);
  const auto rows = static_cast<std::size_t>(*nrows);

  if (header.count("nbands") != 0 && number("nbands").value_or(1) != 1)
    throw UnsupportedBandCount(source, static_cast<unsigned>(*number("nbands")));

  double dx = 0.0;
  double dy = 0.0;
  if (auto cs = number("cellsize")) {
    dx = dy = *cs;
  } else if (auto x = number("dx"), y = number("dy"); x && y) {
    dx = *x;
    dy = *y;
  } else {
    throw MissingGeoreference(source, "cellsize");
  }
  if (!(dx > 0.0) || !(dy > 0.0)) throw RasterReadError(source, "cell size must be positive");

  double west = 0.0;
  double south = 0.0;
  if (auto x = number("xllcorner")) {
    west = *x;
  } else if (auto xc = number("xllcenter")) {
    west = *xc - 0.5 * dx;
  } else {
    throw MissingGeoreference(source, "xllcorner");
  }
  if (auto y = number("yllcorner")) {
    south = *y;
  } else if (auto yc = number("yllcenter")) {
    south = *yc - 0.5 * dy;
  } else {
    throw MissingGeoreference(source, "yllcorner");
  }
  const auto nodata = number("nodata_value");

  in.clear();
  in.seekg(data_start);
  std::vector<double> values;
  values.reserve(rows * cols);
  while (in >> token) {
    auto v = text::parse_double(token);
    if (!v) throw RasterReadError(source, "non-numeric cell value '" + token + "'");
    values.push_back(nodata && *v == *nodata ? kMissing : *v);
  }
  if (values.size() != rows * cols)
    throw RasterReadError(source, "expected " + std::to_string(rows * cols) + " cell values, found " +
                                      std::to_string(values.size()));

  GridSpec grid;
  grid.bounds = GeoBounds{west, west + dx * static_cast<double>(cols), south,
                          south + dy * static_cast<double>(rows)};
  grid.cell_size_m = dy * kMetersPerDegreeLat;
  grid.rows = rows;
  grid.cols = cols;
  return RasterLayer(variable, temporal, grid, std::move(values), nodata.value_or(-9999.0));
}

inline RasterLayer read(const std::filesystem::path& path, Variable variable, Temporal temporal) {
  std::string content;
  try {
    content = files::read_text(path);
  } catch (const DataError&) {
    throw RasterReadError(path.string(), "cannot open file");
  }
  return parse(content, path.string(), variable, temporal);
}

inline std::string format(const RasterLayer& layer) {
  const auto& g = layer.grid;
  const double dx = g.cell_width_deg();
  const double dy = g.cell_height_deg();
  std::string out;
  out += "ncols " + std::to_string(g.cols) + "\n";
  out += "nrows " + std::to_string(g.rows) + "\n";
  out += "xllcorner " + text::format_double(g.bounds.min_lon) + "\n";
  out += "yllcorner " + text::format_double(g.bounds.min_lat) + "\n";
  if (std::abs(dx - dy) <= 1e-12 * dx) {
    out += "cellsize " + text::format_double(dx) + "\n";
  } else {
    out += "dx " + text::format_double(dx) + "\n";
    out += "dy " + text::format_double(dy) + "\n";
  }
  out += "NODATA_value " + text::format_double(layer.nodata) + "\n";
  for (std::size_t r = 0; r < g.rows; ++r) {
    for (std::size_t c = 0; c < g.cols; ++c) {
      const double v = layer.at(r, c);
      if (c) out.push_back(' ');
      out += text::format_double(is_missing(v) ? layer.nodata : v);
    }
    out.push_back('\n');
  }
  return out;
}

inline void write(const RasterLayer& layer, const std::filesystem::path& path) {
  files::write_atomic(path, format(layer));
}

}  // namespace ascii_grid
}  // namespace aqs::raster
