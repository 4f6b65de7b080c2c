#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "aqs/core/parallel.hpp"
#include "aqs/ml/matrix.hpp"
#include "aqs/ml/random.hpp"
#include "aqs/ml/tree.hpp"

namespace aqs::ml::forest {

struct ForestParams {
  int n_trees = 100;
  std::optional<int> max_depth;
  int min_samples_leaf = 1;
  bool bootstrap = true;
};

struct ForestFit {
  std::vector<tree::RegressionTree> trees;
};

// Bagged CART trees; every tree considers all features at each split.
// Tree t draws its bootstrap sample from derive_seed(seed, t).
inline ForestFit fit(const Matrix& z, std::span<const double> y, const ForestParams& p, std::uint64_t seed) {
  ForestFit out;
  out.trees.resize(static_cast<std::size_t>(p.n_trees));
  const tree::TreeParams tp{p.max_depth, p.min_samples_leaf};
  const std::size_t n = z.rows;

  std::optional<tree::Presorted> shared;
  if (!p.bootstrap) {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    shared.emplace(z, std::move(all));
  }
  parallel_for(out.trees.size(), [&](std::size_t t) {
    if (shared) {
      out.trees[t] = tree::fit(*shared, y, tp);
      return;
    }
    std::mt19937_64 rng(derive_seed(seed, t));
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<std::size_t> sample(n);
    for (auto& s : sample) s = pick(rng);
    out.trees[t] = tree::fit(tree::Presorted(z, std::move(sample)), y, tp);
  });
  return out;
}

inline double predict_row(const ForestFit& f, std::span<const double> z) {
  double s = 0.0;
  for (const auto& t : f.trees) s += t.predict(z);
  return s / static_cast<double>(f.trees.size());
}

}  // namespace aqs::ml::forest
