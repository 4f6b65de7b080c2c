#pragma once

#include <numeric>
#include <span>
#include <vector>

#include "aqs/ml/matrix.hpp"
#include "aqs/ml/tree.hpp"

namespace aqs::ml::boosting {

struct BoostingParams {
  int n_stages = 100;
  double learning_rate = 0.1;
  int max_depth = 3;
};

struct BoostingFit {
  double initial = 0.0;  // mean of the training target
  double learning_rate = 0.1;
  std::vector<tree::RegressionTree> stages;
  // Training MSE after 0..n_stages stages (entry 0 is the constant model).
  std::vector<double> train_mse;
};

// Least-squares gradient boosting: each stage fits a depth-limited tree to
// the current residuals and adds learning_rate times its prediction.
inline BoostingFit fit(const Matrix& z, std::span<const double> y, const BoostingParams& p) {
  BoostingFit out;
  out.learning_rate = p.learning_rate;
  const std::size_t n = z.rows;

  double lo = y[0], hi = y[0], sum = 0.0;
  for (double v : y) {
    sum += v;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  out.initial = lo == hi ? lo : std::clamp(sum / static_cast<double>(n), lo, hi);

  std::vector<double> f(n, out.initial);
  std::vector<double> resid(n);
  const auto mse = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += (y[i] - f[i]) * (y[i] - f[i]);
    return s / static_cast<double>(n);
  };
  out.train_mse.push_back(mse());

  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  const tree::Presorted sorted(z, std::move(all));
  const tree::TreeParams tp{p.max_depth, 1};
  out.stages.reserve(static_cast<std::size_t>(p.n_stages));
  for (int s = 0; s < p.n_stages; ++s) {
    for (std::size_t i = 0; i < n; ++i) resid[i] = y[i] - f[i];
    auto t = tree::fit(sorted, resid, tp);
    for (std::size_t i = 0; i < n; ++i) f[i] += p.learning_rate * t.predict(z.row(i));
    out.stages.push_back(std::move(t));
    out.train_mse.push_back(mse());
  }
  return out;
}

inline double predict_row(const BoostingFit& b, std::span<const double> z) {
  double s = b.initial;
  for (const auto& t : b.stages) s += b.learning_rate * t.predict(z);
  return s;
}

}  // namespace aqs::ml::boosting
