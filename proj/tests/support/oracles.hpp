#pragma once

// Reference computations that share no code with the library.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace aqs::test_support {

// Least squares with intercept via the normal equations [1|X]^T [1|X] b =
// [1|X]^T y, solved by Gauss-Jordan elimination with partial pivoting in
// long double. Returns {intercept, w_1, ..., w_p}.
inline std::vector<double> normal_equation_fit(const std::vector<std::vector<double>>& x,
                                               const std::vector<double>& y) {
  const std::size_t n = x.size();
  const std::size_t p = x.at(0).size() + 1;
  std::vector<std::vector<long double>> a(p, std::vector<long double>(p + 1, 0.0L));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<long double> row(p);
    row[0] = 1.0L;
    for (std::size_t j = 1; j < p; ++j) row[j] = x[i][j - 1];
    for (std::size_t r = 0; r < p; ++r) {
      for (std::size_t c = 0; c < p; ++c) a[r][c] += row[r] * row[c];
      a[r][p] += row[r] * y[i];
    }
  }
  for (std::size_t col = 0; col < p; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < p; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    if (a[pivot][col] == 0.0L) throw std::runtime_error("singular normal equations");
    std::swap(a[col], a[pivot]);
    const long double d = a[col][col];
    for (auto& v : a[col]) v /= d;
    for (std::size_t r = 0; r < p; ++r) {
      if (r == col) continue;
      const long double f = a[r][col];
      for (std::size_t c = col; c <= p; ++c) a[r][c] -= f * a[col][c];
    }
  }
  std::vector<double> out(p);
  for (std::size_t r = 0; r < p; ++r) out[r] = static_cast<double>(a[r][p]);
  return out;
}

// Epsilon-SVR on exactly three training points, solved by brute force over
// the dual in terms of beta = alpha - alpha*:
//   min 1/2 beta^T K beta + eps * sum|beta_i| - y^T beta
//   s.t. sum beta = 0, |beta_i| <= C
// Substituting beta_3 = -beta_1 - beta_2 leaves a 2-D box search, done on a
// coarse grid that is repeatedly zoomed around the best cell. Features are
// z-scored (population std) before the RBF kernel.
struct SvrOracle {
  std::vector<std::vector<double>> z;  // standardized training points
  std::vector<double> mean, stddev;
  std::array<double, 3> beta{};
  double bias = 0.0;
  double gamma = 0.0;

  double kernel(const std::vector<double>& a, const std::vector<double>& b) const {
    double d2 = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) d2 += (a[k] - b[k]) * (a[k] - b[k]);
    return std::exp(-gamma * d2);
  }

  double predict(const std::vector<double>& x) const {
    std::vector<double> s(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) s[k] = (x[k] - mean[k]) / stddev[k];
    double f = bias;
    for (std::size_t i = 0; i < 3; ++i) f += beta[i] * kernel(z[i], s);
    return f;
  }
};

inline SvrOracle svr_brute_force(const std::vector<std::vector<double>>& x, const std::vector<double>& y, double c,
                                 double eps, double gamma) {
  if (x.size() != 3 || y.size() != 3) throw std::invalid_argument("oracle handles exactly three points");
  SvrOracle o;
  o.gamma = gamma;
  const std::size_t p = x[0].size();
  o.mean.assign(p, 0.0);
  o.stddev.assign(p, 0.0);
  for (std::size_t k = 0; k < p; ++k) {
    for (const auto& r : x) o.mean[k] += r[k] / 3.0;
    for (const auto& r : x) o.stddev[k] += (r[k] - o.mean[k]) * (r[k] - o.mean[k]) / 3.0;
    o.stddev[k] = std::sqrt(o.stddev[k]);
  }
  for (const auto& r : x) {
    std::vector<double> s(p);
    for (std::size_t k = 0; k < p; ++k) s[k] = (r[k] - o.mean[k]) / o.stddev[k];
    o.z.push_back(s);
  }
  double k[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) k[i][j] = o.kernel(o.z[i], o.z[j]);

  const auto objective = [&](double b1, double b2) {
    const double b[3] = {b1, b2, -b1 - b2};
    if (std::fabs(b[2]) > c) return std::numeric_limits<double>::infinity();
    double quad = 0.0, lin = 0.0;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) quad += b[i] * k[i][j] * b[j];
      lin += eps * std::fabs(b[i]) - y[i] * b[i];
    }
    return 0.5 * quad + lin;
  };

  double lo1 = -c, hi1 = c, lo2 = -c, hi2 = c;
  double best1 = 0.0, best2 = 0.0;
  constexpr int kSteps = 200;
  for (int round = 0; round < 40; ++round) {
    double best = std::numeric_limits<double>::infinity();
    const double s1 = (hi1 - lo1) / kSteps, s2 = (hi2 - lo2) / kSteps;
    for (int i = 0; i <= kSteps; ++i) {
      for (int j = 0; j <= kSteps; ++j) {
        const double b1 = lo1 + i * s1, b2 = lo2 + j * s2;
        const double v = objective(b1, b2);
        if (v < best) {
          best = v;
          best1 = b1;
          best2 = b2;
        }
      }
    }
    lo1 = std::max(-c, best1 - 4 * s1);
    hi1 = std::min(c, best1 + 4 * s1);
    lo2 = std::max(-c, best2 - 4 * s2);
    hi2 = std::min(c, best2 + 4 * s2);
  }
  o.beta = {best1, best2, -best1 - best2};

  // Bias from the KKT conditions of a free coefficient: f(x_i) = y_i - eps*sign(beta_i).
  // With no free coefficient, the midpoint of the feasible interval.
  const double tol = 1e-7 * c;
  double free_sum = 0.0;
  int free_n = 0;
  double lower = -std::numeric_limits<double>::infinity(), upper = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    double f = 0.0;
    for (int j = 0; j < 3; ++j) f += o.beta[j] * k[i][j];
    const double a = std::fabs(o.beta[i]);
    if (a > tol && a < c - tol) {
      free_sum += y[i] - eps * (o.beta[i] > 0 ? 1.0 : -1.0) - f;
      ++free_n;
    } else if (a <= tol) {
      // |y_i - f_i - b| <= eps
      lower = std::max(lower, y[i] - f - eps);
      upper = std::min(upper, y[i] - f + eps);
    } else if (o.beta[i] > 0) {
      upper = std::min(upper, y[i] - f - eps);
    } else {
      lower = std::max(lower, y[i] - f + eps);
    }
  }
  o.bias = free_n > 0 ? free_sum / free_n : 0.5 * (lower + upper);
  return o;
}

// round-half-up of 0.7 * n in integer arithmetic.
inline std::size_t seventy_percent(std::size_t n) { return (7 * n + 5) / 10; }

}  // namespace aqs::test_support
