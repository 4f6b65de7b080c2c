#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "aqs/ml/matrix.hpp"

namespace aqs::ml::linear {

struct LinearFit {
  std::vector<double> weights;  // one per active standardized feature
  double intercept = 0.0;
  bool ridge_fallback = false;  // design was rank deficient
};

// Ordinary least squares with intercept via column-pivoting QR. A rank
// deficient design falls back to ridge with lambda = 1e-10 * trace(AᵀA).
inline LinearFit fit(const Matrix& z, std::span<const double> y) {
  const auto n = static_cast<Eigen::Index>(z.rows);
  const auto q = static_cast<Eigen::Index>(z.cols);
  Eigen::MatrixXd a(n, q + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, 0) = 1.0;
    for (Eigen::Index j = 0; j < q; ++j) a(i, j + 1) = z(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  }
  const Eigen::Map<const Eigen::VectorXd> b(y.data(), n);

  LinearFit out;
  Eigen::VectorXd coef;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() == q + 1) {
    coef = qr.solve(b);
  } else {
    const Eigen::MatrixXd ata = a.transpose() * a;
    const double lambda = 1e-10 * ata.trace();
    Eigen::MatrixXd reg = ata;
    reg.diagonal().array() += lambda;
    coef = reg.ldlt().solve(a.transpose() * b);
    out.ridge_fallback = true;
  }
  out.intercept = coef(0);
  out.weights.assign(coef.data() + 1, coef.data() + coef.size());
  return out;
}

inline double predict_row(const LinearFit& f, std::span<const double> z) {
  double s = f.intercept;
  for (std::size_t j = 0; j < f.weights.size(); ++j) s += f.weights[j] * z[j];
  return s;
}

}  // namespace aqs::ml::linear
