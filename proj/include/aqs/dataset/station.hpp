#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "aqs/core/csv.hpp"
#include "aqs/core/error.hpp"
#include "aqs/core/files.hpp"
#include "aqs/core/text.hpp"

namespace aqs::dataset {

struct Station {
  std::string id;
  std::string name;
  double lon = 0.0;
  double lat = 0.0;
  bool operator==(const Station&) const = default;
};

// Parses a stations CSV with header id,name,lon,lat. Order is preserved.
inline std::vector<Station> parse_stations(const std::string& content, const std::string& source) {
  const auto doc = csv::parse(content, source);
  csv::require_header(doc, {"id", "name", "lon", "lat"}, source);
  std::vector<Station> out;
  std::set<std::string> seen;
  for (const auto& [line, f] : doc.records) {
    const std::string where = source + ":" + std::to_string(line);
    if (f[0].empty()) throw DataError(where + ": empty station id");
    const auto lon = text::parse_double(f[2]);
    const auto lat = text::parse_double(f[3]);
    if (!lon) throw DataError(where + ": unparsable longitude '" + f[2] + "'");
    if (!lat) throw DataError(where + ": unparsable latitude '" + f[3] + "'");
    if (*lon < -180.0 || *lon > 180.0) throw DataError(where + ": longitude out of range");
    if (*lat < -90.0 || *lat > 90.0) throw DataError(where + ": latitude out of range");
    if (!seen.insert(f[0]).second) throw DataError(where + ": duplicate station id '" + f[0] + "'");
    out.push_back({f[0], f[1], *lon, *lat});
  }
  return out;
}

inline std::vector<Station> load_stations(const std::filesystem::path& path) {
  return parse_stations(files::read_text(path), path.string());
}

inline std::string format_stations(const std::vector<Station>& stations) {
  std::string out = "id,name,lon,lat\n";
  for (const auto& s : stations) {
    out += csv::quote(s.id) + "," + csv::quote(s.name) + "," + text::format_double(s.lon) + "," +
           text::format_double(s.lat) + "\n";
  }
  return out;
}

}  // namespace aqs::dataset
