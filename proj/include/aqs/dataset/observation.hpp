#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "aqs/core/csv.hpp"
#include "aqs/core/error.hpp"
#include "aqs/core/files.hpp"
#include "aqs/core/text.hpp"

namespace aqs::dataset {

// Monthly mean ground-level concentration at one station, µg/m³.
struct GroundObservation {
  std::string station_id;
  int year = 0;
  int month = 0;
  std::string pollutant;
  double concentration = 0.0;
  bool operator==(const GroundObservation&) const = default;
};

struct GroundTruth {
  std::vector<GroundObservation> observations;
  std::size_t skipped_empty = 0;
};

// Header station_id,year,month,pollutant,value. Rows with an empty value are
// skipped and counted.
inline GroundTruth parse_ground_truth(const std::string& content, const std::string& source) {
  const auto doc = csv::parse(content, source);
  csv::require_header(doc, {"station_id", "year", "month", "pollutant", "value"}, source);
  GroundTruth gt;
  for (const auto& [line, f] : doc.records) {
    const std::string where = source + ":" + std::to_string(line);
    const auto year = text::parse_int<int>(f[1]);
    const auto month = text::parse_int<int>(f[2]);
    if (!year) throw DataError(where + ": unparsable year '" + f[1] + "'");
    if (!month || *month < 1 || *month > 12) throw DataError(where + ": month out of range '" + f[2] + "'");
    if (f[4].empty()) {
      ++gt.skipped_empty;
      continue;
    }
    const auto value = text::parse_double(f[4]);
    if (!value) throw DataError(where + ": unparsable value '" + f[4] + "'");
    if (*value < 0.0) throw DataError(where + ": negative concentration " + f[4]);
    gt.observations.push_back({f[0], *year, *month, text::lower(f[3]), *value});
  }
  return gt;
}

inline GroundTruth load_ground_truth(const std::filesystem::path& path) {
  return parse_ground_truth(files::read_text(path), path.string());
}

inline std::string format_ground_truth(const std::vector<GroundObservation>& obs) {
  std::string out = "station_id,year,month,pollutant,value\n";
  for (const auto& o : obs) {
    out += csv::quote(o.station_id) + "," + std::to_string(o.year) + "," + std::to_string(o.month) + "," +
           o.pollutant + "," + text::format_double(o.concentration) + "\n";
  }
  return out;
}

}  // namespace aqs::dataset
