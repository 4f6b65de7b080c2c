#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aqs/core/error.hpp"
#include "aqs/ml/matrix.hpp"

namespace aqs::ml::svr {

struct SvrParams {
  double c = 10.0;
  double epsilon = 0.5;
  std::optional<double> gamma;  // RBF gamma; nullopt = 1 / n_features
};

struct SolverOptions {
  double tolerance = 1e-4;        // maximal KKT violation at exit
  long max_iterations = 100000;
};

// Support vectors with their dual pair (alpha, alpha*); the expansion
// coefficient is alpha - alpha*.
struct SvrFit {
  double gamma = 1.0;
  double c = 10.0;
  double epsilon = 0.5;
  double bias = 0.0;
  Matrix support;  // standardized support vectors, one per row
  std::vector<double> alpha;
  std::vector<double> alpha_star;
  long iterations = 0;
};

inline double rbf(std::span<const double> a, std::span<const double> b, double gamma) {
  double d2 = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d2 += (a[k] - b[k]) * (a[k] - b[k]);
  return std::exp(-gamma * d2);
}

// ε-SVR dual solved by SMO with second-order working-set selection.
//
// The 2n dual variables are beta = [alpha; alpha*] with signs s = [+1; -1]:
//   min ½ βᵀQβ + pᵀβ   s.t. sᵀβ = 0, 0 <= β <= C
// where Q_tu = s_t s_u K(x_t, x_u), p = [ε - y; ε + y].
inline SvrFit fit(const Matrix& z, std::span<const double> y, const SvrParams& params,
                  const SolverOptions& opt = {}) {
  const std::size_t n = z.rows;
  const std::size_t m = 2 * n;
  const double c = params.c;
  const double gamma = params.gamma.value_or(z.cols == 0 ? 1.0 : 1.0 / static_cast<double>(z.cols));

  std::vector<double> kernel(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    kernel[i * n + i] = 1.0;
    for (std::size_t j = 0; j < i; ++j) kernel[i * n + j] = kernel[j * n + i] = rbf(z.row(i), z.row(j), gamma);
  }
  const auto base = [n](std::size_t t) { return t < n ? t : t - n; };
  const auto sign = [n](std::size_t t) { return t < n ? 1.0 : -1.0; };
  const auto k = [&](std::size_t t, std::size_t u) { return kernel[base(t) * n + base(u)]; };

  std::vector<double> beta(m, 0.0);
  std::vector<double> grad(m);
  for (std::size_t t = 0; t < n; ++t) {
    grad[t] = params.epsilon - y[t];
    grad[t + n] = params.epsilon + y[t];
  }
  const auto in_up = [&](std::size_t t) { return sign(t) > 0 ? beta[t] < c : beta[t] > 0.0; };
  const auto in_low = [&](std::size_t t) { return sign(t) > 0 ? beta[t] > 0.0 : beta[t] < c; };
  constexpr double kTau = 1e-12;

  long iter = 0;
  for (;; ++iter) {
    // i maximises -s_t G_t over the "up" set.
    double gmax = -std::numeric_limits<double>::infinity();
    std::size_t i = m;
    for (std::size_t t = 0; t < m; ++t) {
      if (!in_up(t)) continue;
      const double v = -sign(t) * grad[t];
      if (v >= gmax) {
        if (v > gmax || i == m) i = t;
        gmax = v;
      }
    }
    // j minimises the second-order objective over the "low" set.
    double gmax2 = -std::numeric_limits<double>::infinity();
    double best_obj = std::numeric_limits<double>::infinity();
    std::size_t j = m;
    for (std::size_t t = 0; t < m; ++t) {
      if (!in_low(t)) continue;
      const double v = sign(t) * grad[t];
      gmax2 = std::max(gmax2, v);
      if (i == m) continue;
      const double b = gmax + v;
      if (b > 0.0) {
        double a = k(i, i) + k(t, t) - 2.0 * k(i, t);
        if (a <= 0.0) a = kTau;
        const double obj = -(b * b) / a;
        if (obj < best_obj) {
          best_obj = obj;
          j = t;
        }
      }
    }
    if (i == m || j == m || gmax + gmax2 < opt.tolerance) break;
    if (iter >= opt.max_iterations) {
      throw ConvergenceError("SVR solver did not reach KKT tolerance " + std::to_string(opt.tolerance) +
                             " within " + std::to_string(opt.max_iterations) + " iterations");
    }

    const double si = sign(i), sj = sign(j);
    const double old_i = beta[i], old_j = beta[j];
    double a = k(i, i) + k(j, j) - 2.0 * k(i, j);
    if (a <= 0.0) a = kTau;
    if (si != sj) {
      const double delta = (-grad[i] - grad[j]) / a;
      const double diff = beta[i] - beta[j];
      beta[i] += delta;
      beta[j] += delta;
      if (diff > 0.0) {
        if (beta[j] < 0.0) { beta[j] = 0.0; beta[i] = diff; }
      } else {
        if (beta[i] < 0.0) { beta[i] = 0.0; beta[j] = -diff; }
      }
      if (diff > 0.0) {
        if (beta[i] > c) { beta[i] = c; beta[j] = c - diff; }
      } else {
        if (beta[j] > c) { beta[j] = c; beta[i] = c + diff; }
      }
    } else {
      const double delta = (grad[i] - grad[j]) / a;
      const double sum = beta[i] + beta[j];
      beta[i] -= delta;
      beta[j] += delta;
      if (sum > c) {
        if (beta[i] > c) { beta[i] = c; beta[j] = sum - c; }
      } else {
        if (beta[j] < 0.0) { beta[j] = 0.0; beta[i] = sum; }
      }
      if (sum > c) {
        if (beta[j] > c) { beta[j] = c; beta[i] = sum - c; }
      } else {
        if (beta[i] < 0.0) { beta[i] = 0.0; beta[j] = sum; }
      }
    }
    const double di = beta[i] - old_i, dj = beta[j] - old_j;
    for (std::size_t t = 0; t < m; ++t) {
      const double st = sign(t);
      grad[t] += st * si * k(t, i) * di + st * sj * k(t, j) * dj;
    }
  }

  // Bias from free variables, else the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity(), lb = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  std::size_t free_n = 0;
  for (std::size_t t = 0; t < m; ++t) {
    const double yg = sign(t) * grad[t];
    const bool at_upper = beta[t] >= c;
    const bool at_lower = beta[t] <= 0.0;
    if (at_upper) {
      if (sign(t) < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (at_lower) {
      if (sign(t) > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++free_n;
      free_sum += yg;
    }
  }
  const double rho = free_n > 0 ? free_sum / static_cast<double>(free_n) : (ub + lb) / 2.0;

  SvrFit out;
  out.gamma = gamma;
  out.c = c;
  out.epsilon = params.epsilon;
  out.bias = -rho;
  out.iterations = iter;
  std::vector<std::size_t> sv;
  for (std::size_t t = 0; t < n; ++t)
    if (beta[t] > 0.0 || beta[t + n] > 0.0) sv.push_back(t);
  out.support = z.select_rows(sv);
  for (auto t : sv) {
    out.alpha.push_back(beta[t]);
    out.alpha_star.push_back(beta[t + n]);
  }
  return out;
}

inline double predict_row(const SvrFit& f, std::span<const double> z) {
  double s = f.bias;
  for (std::size_t i = 0; i < f.support.rows; ++i)
    s += (f.alpha[i] - f.alpha_star[i]) * rbf(f.support.row(i), z, f.gamma);
  return s;
}

struct DualDiagnostics {
  double max_box_violation = 0.0;  // max over alpha, alpha* of distance outside [0, C]
  double equality_violation = 0.0;  // |Σ(alpha - alpha*)|
};

inline DualDiagnostics dual_check(const SvrFit& f) {
  DualDiagnostics d;
  double sum = 0.0;
  for (std::size_t i = 0; i < f.alpha.size(); ++i) {
    for (double a : {f.alpha[i], f.alpha_star[i]})
      d.max_box_violation = std::max({d.max_box_violation, -a, a - f.c});
    sum += f.alpha[i] - f.alpha_star[i];
  }
  d.equality_violation = std::abs(sum);
  return d;
}

}  // namespace aqs::ml::svr
