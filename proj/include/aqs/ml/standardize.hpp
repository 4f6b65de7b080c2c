#pragma once

#include <cmath>
#include <vector>

#include "aqs/ml/matrix.hpp"

namespace aqs::ml {

// Z-score scaling with train-set statistics (population stddev). Constant
// columns are dropped from the transformed output and listed in `dropped`;
// their stddev is stored as 1 so every entry stays positive.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> stddev;
  std::vector<std::size_t> active;
  std::vector<std::size_t> dropped;

  static Standardizer fit(const Matrix& x) {
    Standardizer s;
    s.mean.assign(x.cols, 0.0);
    s.stddev.assign(x.cols, 1.0);
    const double n = static_cast<double>(x.rows);
    for (std::size_t j = 0; j < x.cols; ++j) {
      double sum = 0.0;
      for (std::size_t i = 0; i < x.rows; ++i) sum += x(i, j);
      const double m = sum / n;
      double ss = 0.0;
      for (std::size_t i = 0; i < x.rows; ++i) ss += (x(i, j) - m) * (x(i, j) - m);
      const double sd = std::sqrt(ss / n);
      s.mean[j] = m;
      if (sd > 1e-12 * std::max(1.0, std::abs(m))) {
        s.stddev[j] = sd;
        s.active.push_back(j);
      } else {
        s.dropped.push_back(j);
      }
    }
    return s;
  }

  std::size_t arity() const { return mean.size(); }

  Matrix transform(const Matrix& x) const {
    Matrix z(x.rows, active.size());
    for (std::size_t i = 0; i < x.rows; ++i)
      for (std::size_t k = 0; k < active.size(); ++k) {
        const auto j = active[k];
        z(i, k) = (x(i, j) - mean[j]) / stddev[j];
      }
    return z;
  }
};

}  // namespace aqs::ml
