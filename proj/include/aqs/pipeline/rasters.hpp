#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "aqs/core/error.hpp"
#include "aqs/core/parallel.hpp"
#include "aqs/core/text.hpp"
#include "aqs/dataset/builder.hpp"
#include "aqs/grid/surface.hpp"
#include "aqs/raster/io.hpp"
#include "aqs/raster/ops.hpp"

namespace aqs::pipeline {

namespace fs = std::filesystem;
using raster::RasterFormat;
using raster::RasterLayer;
using raster::Temporal;
using raster::Variable;

// A raster file whose name encodes its variable and time:
//   <variable>_<YYYY>_<MM>.<ext>   monthly
//   <variable>_<YYYY>.<ext>        yearly
//   <variable>.<ext>               static
struct RasterFile {
  Variable variable;
  Temporal temporal;
  fs::path path;
};

inline std::optional<RasterFile> classify_raster_name(const fs::path& path) {
  static const std::regex pattern(R"(^([a-z_]+?)(?:_(\d{4})(?:_(\d{2}))?)?$)");
  const auto ext = text::lower(path.extension().string());
  if (ext != ".tif" && ext != ".tiff" && ext != ".asc") return std::nullopt;
  const std::string stem = path.stem().string();
  std::smatch m;
  if (!std::regex_match(stem, m, pattern)) return std::nullopt;
  Variable v;
  try {
    v = raster::parse_input_variable(m[1].str());
  } catch (const DataError&) {
    return std::nullopt;
  }
  Temporal t = Temporal::fixed();
  if (m[3].matched) {
    const int month = std::stoi(m[3].str());
    if (month < 1 || month > 12) return std::nullopt;
    t = Temporal::of_month(std::stoi(m[2].str()), month);
  } else if (m[2].matched) {
    t = Temporal::of_year(std::stoi(m[2].str()));
  }
  return RasterFile{v, t, path};
}

inline std::string raster_file_name(Variable v, const Temporal& t, RasterFormat format) {
  std::string name(raster::name_of(v));
  if (t.kind == Temporal::Kind::month) {
    name += "_" + std::to_string(t.year) + (t.month < 10 ? "_0" : "_") + std::to_string(t.month);
  } else if (t.kind == Temporal::Kind::year) {
    name += "_" + std::to_string(t.year);
  }
  return name + raster::extension(format);
}

// Files in `dir` (not recursive) that follow the naming scheme, sorted by path.
inline std::vector<RasterFile> scan_raster_dir(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw DataError("raster directory not found: " + dir.string());
  std::vector<RasterFile> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    if (auto rf = classify_raster_name(entry.path())) out.push_back(*rf);
  }
  std::sort(out.begin(), out.end(), [](const RasterFile& a, const RasterFile& b) { return a.path < b.path; });
  return out;
}

// Reads every raster relevant to `year` for the given variables and
// resamples each onto `target`. Throws naming the first (variable, month)
// with no usable file.
inline dataset::RasterSet load_harmonized(const fs::path& dir, int year, const std::vector<Variable>& variables,
                                          const raster::GridSpec& target) {
  const auto files = scan_raster_dir(dir);
  std::vector<const RasterFile*> wanted;
  for (const auto& f : files) {
    if (std::find(variables.begin(), variables.end(), f.variable) == variables.end()) continue;
    if (f.temporal.kind != Temporal::Kind::static_ && f.temporal.year != year) continue;
    wanted.push_back(&f);
  }
  std::vector<std::optional<RasterLayer>> layers(wanted.size());
  parallel_for(wanted.size(), [&](std::size_t i) {
    const auto& f = *wanted[i];
    layers[i] = raster::resample_to_grid(raster::read_raster(f.path, f.variable, f.temporal), target);
  });
  dataset::RasterSet set;
  for (auto& l : layers) set.add(std::move(*l));
  for (auto v : variables) {
    for (const auto& ym : dataset::months_of(year)) {
      if (!set.find(v, ym))
        throw DataError("raster directory " + dir.string() + " has no " + std::string(raster::name_of(v)) +
                        " raster for " + std::to_string(year) + "-" + (ym.month < 10 ? "0" : "") +
                        std::to_string(ym.month));
    }
  }
  return set;
}

// Per-variable yearly mean of the twelve monthly layers. Yearly or static
// layers that stand in for every month are used as they are.
inline grid::Composites yearly_composites(const dataset::RasterSet& set, int year,
                                          const std::vector<Variable>& variables) {
  grid::Composites out;
  for (auto v : variables) {
    std::vector<const RasterLayer*> picked;
    for (const auto& ym : dataset::months_of(year)) {
      const auto* l = set.find(v, ym);
      if (!l) throw DataError("no " + std::string(raster::name_of(v)) + " raster for " + std::to_string(year));
      if (std::find(picked.begin(), picked.end(), l) == picked.end()) picked.push_back(l);
    }
    if (picked.size() == 1) {
      out.emplace(v, *picked.front());
      continue;
    }
    std::vector<RasterLayer> copies;
    for (const auto* l : picked) copies.push_back(*l);
    out.emplace(v, raster::temporal_composite(copies));
  }
  return out;
}

inline void write_composites(const grid::Composites& composites, const fs::path& dir, RasterFormat format) {
  fs::create_directories(dir);
  for (const auto& [v, layer] : composites)
    raster::write_raster(layer, dir / (std::string(raster::name_of(v)) + raster::extension(format)), format);
}

// Reads `<variable>.tif|.tiff|.asc` for each requested variable.
inline grid::Composites load_composites(const fs::path& dir, const std::vector<Variable>& variables) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw DataError("composites directory not found: " + dir.string());
  grid::Composites out;
  for (auto v : variables) {
    const std::string base(raster::name_of(v));
    std::optional<fs::path> found;
    for (const char* ext : {".tif", ".tiff", ".asc"}) {
      if (fs::is_regular_file(dir / (base + ext), ec)) {
        found = dir / (base + ext);
        break;
      }
    }
    if (!found)
      throw DataError("composites directory " + dir.string() + " has no raster for variable '" + base + "'");
    out.emplace(v, raster::read_raster(*found, v, Temporal::fixed()));
  }
  return out;
}

}  // namespace aqs::pipeline
