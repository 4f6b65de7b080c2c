#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "aqs/core/error.hpp"

namespace aqs::ml {

struct MetricsReport {
  double r2 = 0.0;
  double mae = 0.0;   // µg/m³
  double mse = 0.0;   // (µg/m³)²
  std::optional<double> mape;  // percent; absent when every actual is zero
  double rmse = 0.0;  // µg/m³
  std::size_t mape_excluded = 0;  // rows with actual == 0
  std::vector<std::pair<double, double>> pairs;  // (actual, predicted)
};

// R² = 1 - SSres/SStot. A constant target (SStot = 0) scores 1 for a perfect
// prediction and 0 otherwise.
inline double r2_score(std::span<const double> y_true, std::span<const double> y_pred) {
  if (y_true.size() != y_pred.size() || y_true.empty()) throw Error("r2: length mismatch or empty input");
  double mean = 0.0;
  for (double v : y_true) mean += v;
  mean /= static_cast<double>(y_true.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    ss_res += (y_true[i] - y_pred[i]) * (y_true[i] - y_pred[i]);
    ss_tot += (y_true[i] - mean) * (y_true[i] - mean);
  }
  if (ss_tot == 0.0) return ss_res == 0.0 ? 1.0 : 0.0;
  return 1.0 - ss_res / ss_tot;
}

inline MetricsReport evaluate(std::span<const double> y_true, std::span<const double> y_pred) {
  if (y_true.size() != y_pred.size()) throw DataError("evaluate: y_true and y_pred lengths differ");
  if (y_true.empty()) throw DataError("evaluate: empty input");
  const double n = static_cast<double>(y_true.size());
  MetricsReport m;
  double abs_sum = 0.0, sq_sum = 0.0, pct_sum = 0.0;
  std::size_t pct_n = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const double e = y_true[i] - y_pred[i];
    abs_sum += std::abs(e);
    sq_sum += e * e;
    if (y_true[i] != 0.0) {
      pct_sum += std::abs(e) / std::abs(y_true[i]);
      ++pct_n;
    } else {
      ++m.mape_excluded;
    }
    m.pairs.emplace_back(y_true[i], y_pred[i]);
  }
  m.mae = abs_sum / n;
  m.mse = sq_sum / n;
  m.rmse = std::sqrt(m.mse);
  if (pct_n > 0) m.mape = pct_sum / static_cast<double>(pct_n) * 100.0;
  m.r2 = r2_score(y_true, y_pred);
  return m;
}

}  // namespace aqs::ml
