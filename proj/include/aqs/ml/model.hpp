#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "aqs/core/error.hpp"
#include "aqs/ml/boosting.hpp"
#include "aqs/ml/forest.hpp"
#include "aqs/ml/hyperparams.hpp"
#include "aqs/ml/linear.hpp"
#include "aqs/ml/matrix.hpp"
#include "aqs/ml/standardize.hpp"
#include "aqs/ml/svr.hpp"

namespace aqs::ml {

using FittedParams = std::variant<linear::LinearFit, forest::ForestFit, svr::SvrFit, boosting::BoostingFit>;

// A fitted regressor with everything needed to reproduce its predictions.
struct TrainedModel {
  ModelKind kind = ModelKind::linear;
  std::vector<std::string> feature_names;
  Standardizer scaler;
  std::uint64_t seed = 0;
  HyperParams params;
  FittedParams fitted;

  std::size_t arity() const { return feature_names.size(); }
};

// Fits `kind` on z-scored features. Deterministic for a given seed.
inline TrainedModel train(ModelKind kind, const Matrix& x, std::span<const double> y, const HyperParams& params,
                          std::uint64_t seed, std::vector<std::string> feature_names = {}) {
  if (x.rows < 2) throw DataError("training needs at least 2 rows, got " + std::to_string(x.rows));
  if (x.cols < 1) throw DataError("training needs at least 1 feature");
  if (y.size() != x.rows) throw DataError("target length does not match the number of rows");
  for (double v : x.data)
    if (!std::isfinite(v)) throw DataError("training matrix contains missing or non-finite values");
  for (double v : y)
    if (!std::isfinite(v)) throw DataError("training target contains missing or non-finite values");
  if (kind_of(params) != kind) throw UsageError("hyperparameters do not match model kind " + std::string(name_of(kind)));
  validate(params);
  if (feature_names.empty()) {
    for (std::size_t j = 0; j < x.cols; ++j) feature_names.push_back("x" + std::to_string(j));
  }
  if (feature_names.size() != x.cols) throw UsageError("feature name count does not match matrix width");

  TrainedModel m;
  m.kind = kind;
  m.feature_names = std::move(feature_names);
  m.scaler = Standardizer::fit(x);
  m.seed = seed;
  m.params = params;
  const Matrix z = m.scaler.transform(x);
  switch (kind) {
    case ModelKind::linear:
      m.fitted = linear::fit(z, y);
      break;
    case ModelKind::random_forest:
      m.fitted = forest::fit(z, y, std::get<ForestParams>(params), seed);
      break;
    case ModelKind::svr:
      m.fitted = svr::fit(z, y, std::get<SvrParams>(params));
      break;
    case ModelKind::gradient_boosting:
      m.fitted = boosting::fit(z, y, std::get<BoostingParams>(params));
      break;
  }
  return m;
}

inline std::vector<double> predict(const TrainedModel& m, const Matrix& x) {
  if (x.cols != m.arity())
    throw DataError("model expects " + std::to_string(m.arity()) + " features, got " + std::to_string(x.cols));
  const Matrix z = m.scaler.transform(x);
  std::vector<double> out(x.rows);
  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        for (std::size_t i = 0; i < z.rows; ++i) {
          if constexpr (std::is_same_v<T, linear::LinearFit>) out[i] = linear::predict_row(f, z.row(i));
          else if constexpr (std::is_same_v<T, forest::ForestFit>) out[i] = forest::predict_row(f, z.row(i));
          else if constexpr (std::is_same_v<T, svr::SvrFit>) out[i] = svr::predict_row(f, z.row(i));
          else out[i] = boosting::predict_row(f, z.row(i));
        }
      },
      m.fitted);
  return out;
}

// Linear model expressed on the original feature scale: y = Σ coef_j x_j + intercept.
// Dropped constant features get coefficient 0.
struct RawLinear {
  std::vector<double> coefficients;
  double intercept = 0.0;
};

inline RawLinear linear_coefficients(const TrainedModel& m) {
  const auto* f = std::get_if<linear::LinearFit>(&m.fitted);
  if (!f) throw UsageError("model is not linear");
  RawLinear out;
  out.coefficients.assign(m.arity(), 0.0);
  out.intercept = f->intercept;
  for (std::size_t k = 0; k < m.scaler.active.size(); ++k) {
    const auto j = m.scaler.active[k];
    out.coefficients[j] = f->weights[k] / m.scaler.stddev[j];
    out.intercept -= f->weights[k] * m.scaler.mean[j] / m.scaler.stddev[j];
  }
  return out;
}

inline svr::DualDiagnostics svr_dual_check(const TrainedModel& m) {
  const auto* f = std::get_if<svr::SvrFit>(&m.fitted);
  if (!f) throw UsageError("svr_dual_check requires an svr model");
  return svr::dual_check(*f);
}

}  // namespace aqs::ml
