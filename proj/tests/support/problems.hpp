#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "aqs/ml/matrix.hpp"

namespace aqs::test_support {

struct Problem {
  ml::Matrix x;
  std::vector<double> y;
};

// y = 3 + Σ (j+1) * (-1)^j x_j + noise, features on mixed scales.
inline Problem linear_problem(std::size_t n, std::size_t p, std::uint64_t seed, double noise = 0.3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::normal_distribution<double> e(0.0, noise);
  Problem pr{ml::Matrix(n, p), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    double y = 3.0;
    for (std::size_t j = 0; j < p; ++j) {
      const double scale = std::pow(10.0, static_cast<double>(j % 3) - 1.0);
      pr.x(i, j) = scale * u(rng) + static_cast<double>(j);
      y += (j % 2 ? -1.0 : 1.0) * static_cast<double>(j + 1) * pr.x(i, j) / scale;
    }
    pr.y[i] = y + e(rng);
  }
  return pr;
}

inline std::vector<std::vector<double>> rows_of(const ml::Matrix& m) {
  std::vector<std::vector<double>> out(m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) out[i].assign(m.row(i).begin(), m.row(i).end());
  return out;
}

}  // namespace aqs::test_support
