#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "aqs/core/error.hpp"
#include "aqs/core/parallel.hpp"
#include "aqs/ml/hyperparams.hpp"
#include "aqs/ml/metrics.hpp"
#include "aqs/ml/model.hpp"

namespace aqs::ml {

struct GridEntry {
  HyperParams params;
  double mean_score = 0.0;  // mean test-fold R²
};

struct GridSearchResult {
  std::vector<GridEntry> evaluated;
  HyperParams best;
  std::size_t cv_folds = 5;
};

// Seeded k-fold partition: a shuffled index list cut into k nearly equal folds.
inline std::vector<std::vector<std::size_t>> kfold(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw UsageError("cross-validation needs at least 2 folds");
  if (n < k) {
    throw DataError("cannot form " + std::to_string(k) + " folds from " + std::to_string(n) +
                    " rows: a fold would have no rows");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = n / k + (f < n % k ? 1 : 0);
    folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                    order.begin() + static_cast<std::ptrdiff_t>(pos + size));
    pos += size;
  }
  return folds;
}

// Exhaustive search over the grid. Every combination sees the same folds;
// combination c trains with seed ^ c. Best = highest mean R², first wins ties.
inline GridSearchResult grid_search(ModelKind kind, const ParamGrid& grid, const Matrix& x, std::span<const double> y,
                                    std::size_t cv_folds, std::uint64_t seed,
                                    const HyperParams* base = nullptr) {
  const HyperParams start = base ? *base : default_params(kind);
  if (kind_of(start) != kind) throw UsageError("base hyperparameters do not match model kind");
  const auto combos = expand_grid(start, grid);
  const auto folds = kfold(x.rows, cv_folds, seed);
  for (const auto& f : folds) {
    if (x.rows - f.size() < 2) throw DataError("a cross-validation fold leaves fewer than 2 training rows");
  }

  std::vector<double> scores(combos.size() * cv_folds, 0.0);
  parallel_for(scores.size(), [&](std::size_t task) {
    const std::size_t c = task / cv_folds;
    const std::size_t f = task % cv_folds;
    std::vector<std::size_t> train_idx;
    for (std::size_t g = 0; g < cv_folds; ++g)
      if (g != f) train_idx.insert(train_idx.end(), folds[g].begin(), folds[g].end());
    std::sort(train_idx.begin(), train_idx.end());
    const Matrix xt = x.select_rows(train_idx);
    const auto yt = select(y, train_idx);
    const auto model = train(kind, xt, yt, combos[c], seed ^ static_cast<std::uint64_t>(c));
    const auto pred = predict(model, x.select_rows(folds[f]));
    scores[task] = r2_score(select(y, folds[f]), pred);
  });

  GridSearchResult res;
  res.cv_folds = cv_folds;
  std::size_t best = 0;
  for (std::size_t c = 0; c < combos.size(); ++c) {
    double sum = 0.0;
    for (std::size_t f = 0; f < cv_folds; ++f) sum += scores[c * cv_folds + f];
    res.evaluated.push_back({combos[c], sum / static_cast<double>(cv_folds)});
    if (res.evaluated[c].mean_score > res.evaluated[best].mean_score) best = c;
  }
  res.best = combos[best];
  return res;
}

}  // namespace aqs::ml
