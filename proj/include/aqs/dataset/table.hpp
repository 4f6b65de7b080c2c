#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "aqs/core/csv.hpp"
#include "aqs/core/error.hpp"
#include "aqs/core/files.hpp"
#include "aqs/core/text.hpp"
#include "aqs/raster/layer.hpp"
#include "aqs/raster/variable.hpp"

namespace aqs::dataset {

using raster::is_missing;
using raster::kMissing;
using raster::Variable;

struct TableRow {
  std::string station_id;
  int year = 0;
  int month = 0;
  std::vector<double> features;  // NaN = missing
  double target = kMissing;      // µg/m³, NaN = missing

  bool complete() const {
    return !is_missing(target) && std::none_of(features.begin(), features.end(), [](double v) { return is_missing(v); });
  }
};

// Station-month rows of driving factors plus the ground-truth target.
struct TrainingTable {
  std::vector<Variable> feature_names;  // input-role variables only
  std::vector<TableRow> rows;

  std::size_t size() const { return rows.size(); }

  std::vector<std::string> feature_strings() const {
    std::vector<std::string> out;
    for (auto v : feature_names) out.emplace_back(raster::name_of(v));
    return out;
  }

  // Row-major n x p feature matrix and target vector.
  std::vector<double> matrix() const {
    std::vector<double> out;
    out.reserve(rows.size() * feature_names.size());
    for (const auto& r : rows) out.insert(out.end(), r.features.begin(), r.features.end());
    return out;
  }
  std::vector<double> targets() const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r.target);
    return out;
  }
};

struct CleanResult {
  TrainingTable table;
  std::size_t removed = 0;
};

// Drops rows with any missing feature or target.
inline CleanResult clean(const TrainingTable& table) {
  CleanResult res;
  res.table.feature_names = table.feature_names;
  for (const auto& r : table.rows) {
    if (r.complete()) res.table.rows.push_back(r);
    else ++res.removed;
  }
  if (res.table.rows.empty()) throw DataError("no complete rows remain after removing missing values; cannot train");
  return res;
}

// Number of training rows: round-half-up of fraction * n.
inline std::size_t train_count(std::size_t n, double train_fraction) {
  return static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n) + 0.5 + 1e-9));
}

// Seeded uniform permutation; the first round(fraction * n) rows train.
inline std::pair<TrainingTable, TrainingTable> split(const TrainingTable& table, double train_fraction,
                                                     std::uint64_t seed) {
  const std::size_t n = table.rows.size();
  if (n < 2) throw DataError("train/test split needs at least 2 rows, got " + std::to_string(n));
  if (!(train_fraction > 0.0) || !(train_fraction < 1.0))
    throw UsageError("train fraction must lie in (0, 1)");
  std::size_t k = std::clamp<std::size_t>(train_count(n, train_fraction), 1, n - 1);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  TrainingTable train, test;
  train.feature_names = test.feature_names = table.feature_names;
  for (std::size_t i = 0; i < n; ++i) (i < k ? train : test).rows.push_back(table.rows[order[i]]);
  return {std::move(train), std::move(test)};
}

// Keeps the named feature columns, in the order given.
inline TrainingTable select_features(const TrainingTable& table, const std::vector<Variable>& wanted) {
  std::vector<std::size_t> idx;
  for (auto v : wanted) {
    auto it = std::find(table.feature_names.begin(), table.feature_names.end(), v);
    if (it == table.feature_names.end())
      throw DataError("factor '" + std::string(raster::name_of(v)) + "' is not a column of the dataset");
    idx.push_back(static_cast<std::size_t>(it - table.feature_names.begin()));
  }
  TrainingTable out;
  out.feature_names = wanted;
  out.rows.reserve(table.rows.size());
  for (const auto& r : table.rows) {
    TableRow nr = r;
    nr.features.clear();
    for (auto j : idx) nr.features.push_back(r.features[j]);
    out.rows.push_back(std::move(nr));
  }
  return out;
}

// CSV: station_id,year,month,<features...>,target. Missing cells are empty.
inline std::string format_table(const TrainingTable& table) {
  std::string out = "station_id,year,month";
  for (auto v : table.feature_names) out += "," + std::string(raster::name_of(v));
  out += ",target\n";
  const auto cell = [](double v) { return is_missing(v) ? std::string() : text::format_double(v); };
  for (const auto& r : table.rows) {
    out += csv::quote(r.station_id) + "," + std::to_string(r.year) + "," + std::to_string(r.month);
    for (double v : r.features) out += "," + cell(v);
    out += "," + cell(r.target) + "\n";
  }
  return out;
}

inline TrainingTable parse_table(const std::string& content, const std::string& source) {
  const auto doc = csv::parse(content, source);
  const auto& h = doc.header;
  if (h.size() < 5 || h[0] != "station_id" || h[1] != "year" || h[2] != "month" || h.back() != "target")
    throw DataError(source + ": expected header station_id,year,month,<features...>,target");
  TrainingTable t;
  for (std::size_t j = 3; j + 1 < h.size(); ++j) t.feature_names.push_back(raster::parse_input_variable(h[j]));
  const std::size_t p = t.feature_names.size();
  for (const auto& [line, f] : doc.records) {
    const std::string where = source + ":" + std::to_string(line);
    TableRow r;
    r.station_id = f[0];
    const auto year = text::parse_int<int>(f[1]);
    const auto month = text::parse_int<int>(f[2]);
    if (!year || !month || *month < 1 || *month > 12) throw DataError(where + ": bad year/month");
    r.year = *year;
    r.month = *month;
    const auto num = [&](const std::string& s) {
      if (text::trim(s).empty()) return kMissing;
      auto v = text::parse_double(s);
      if (!v) throw DataError(where + ": unparsable number '" + s + "'");
      return *v;
    };
    for (std::size_t j = 0; j < p; ++j) r.features.push_back(num(f[3 + j]));
    r.target = num(f[3 + p]);
    t.rows.push_back(std::move(r));
  }
  return t;
}

inline TrainingTable load_table(const std::filesystem::path& path) {
  return parse_table(files::read_text(path), path.string());
}

inline void write_table(const TrainingTable& table, const std::filesystem::path& path) {
  files::write_atomic(path, format_table(table));
}

}  // namespace aqs::dataset
