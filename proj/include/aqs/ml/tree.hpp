#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "aqs/ml/matrix.hpp"

namespace aqs::ml::tree {

struct Node {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;     // x[feature] <= threshold goes left
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;
};

struct RegressionTree {
  std::vector<Node> nodes;  // nodes[0] is the root

  double predict(std::span<const double> x) const {
    std::size_t i = 0;
    while (nodes[i].feature >= 0) {
      const Node& n = nodes[i];
      i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return nodes[i].value;
  }
  std::size_t depth() const {
    std::vector<std::size_t> d(nodes.size(), 0);
    std::size_t best = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i].feature < 0) continue;
      d[static_cast<std::size_t>(nodes[i].left)] = d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
      best = std::max(best, d[i] + 1);
    }
    return best;
  }
};

struct TreeParams {
  std::optional<int> max_depth;  // nullopt = grow until pure or too small
  int min_samples_leaf = 1;
};

// Per-feature orderings of a sample list, computed once and reused for every
// tree built on the same rows (boosting stages).
class Presorted {
 public:
  // `samples` lists row indices into x; duplicates (bootstrap) are allowed.
  Presorted(const Matrix& x, std::vector<std::size_t> samples) : x_(&x), samples_(std::move(samples)) {
    order_.resize(x.cols);
    for (std::size_t f = 0; f < x.cols; ++f) {
      auto& o = order_[f];
      o.resize(samples_.size());
      std::iota(o.begin(), o.end(), std::uint32_t{0});
      std::stable_sort(o.begin(), o.end(), [&](std::uint32_t a, std::uint32_t b) {
        return x(samples_[a], f) < x(samples_[b], f);
      });
    }
  }

  const Matrix& x() const { return *x_; }
  const std::vector<std::size_t>& samples() const { return samples_; }
  const std::vector<std::vector<std::uint32_t>>& order() const { return order_; }

 private:
  const Matrix* x_;
  std::vector<std::size_t> samples_;
  std::vector<std::vector<std::uint32_t>> order_;  // slot indices sorted by feature
};

namespace detail {

// CART builder: exact scan over midpoints between sorted distinct values,
// squared-error reduction, ties to the lowest feature then lowest threshold.
class Builder {
 public:
  Builder(const Presorted& data, std::span<const double> target, const TreeParams& params)
      : x_(data.x()), samples_(data.samples()), order_(data.order()), params_(params) {
    y_.resize(samples_.size());
    for (std::size_t s = 0; s < samples_.size(); ++s) y_[s] = target[samples_[s]];
    goes_left_.assign(samples_.size(), 0);
    scratch_.resize(samples_.size());
  }

  RegressionTree build() {
    RegressionTree t;
    t.nodes.reserve(2 * samples_.size());
    if (samples_.empty()) {
      t.nodes.push_back(Node{});
      return t;
    }
    grow(t, 0, samples_.size(), 0);
    return t;
  }

 private:
  double leaf_value(std::size_t b, std::size_t e) const {
    const auto& o = order_[0];
    double sum = 0.0, lo = y_[o[b]], hi = y_[o[b]];
    for (std::size_t i = b; i < e; ++i) {
      const double v = y_[o[i]];
      sum += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (lo == hi) return lo;
    return std::clamp(sum / static_cast<double>(e - b), lo, hi);
  }

  std::int32_t grow(RegressionTree& t, std::size_t b, std::size_t e, int depth) {
    const auto id = static_cast<std::int32_t>(t.nodes.size());
    t.nodes.push_back(Node{});
    const std::size_t n = e - b;
    const double value = leaf_value(b, e);
    t.nodes[static_cast<std::size_t>(id)].value = value;

    const auto min_leaf = static_cast<std::size_t>(std::max(1, params_.min_samples_leaf));
    const bool depth_ok = !params_.max_depth || depth < *params_.max_depth;
    if (!depth_ok || n < 2 * min_leaf || x_.cols == 0) return id;

    const auto& o0 = order_[0];
    double mean = 0.0;
    bool pure = true;
    for (std::size_t i = b; i < e; ++i) {
      mean += y_[o0[i]];
      if (y_[o0[i]] != y_[o0[b]]) pure = false;
    }
    if (pure) return id;
    mean /= static_cast<double>(n);

    double best_gain = 0.0;
    std::int32_t best_feature = -1;
    double best_threshold = 0.0;
    std::size_t best_split = 0;
    for (std::size_t f = 0; f < x_.cols; ++f) {
      const auto& o = order_[f];
      double total = 0.0;
      for (std::size_t i = b; i < e; ++i) total += y_[o[i]] - mean;
      double left = 0.0;
      for (std::size_t i = b; i + 1 < e; ++i) {
        left += y_[o[i]] - mean;
        const std::size_t nl = i + 1 - b;
        const std::size_t nr = n - nl;
        if (nl < min_leaf) continue;
        if (nr < min_leaf) break;
        const double v0 = x_(samples_[o[i]], f);
        const double v1 = x_(samples_[o[i + 1]], f);
        if (!(v0 < v1)) continue;
        const double right = total - left;
        const double gain = left * left / static_cast<double>(nl) + right * right / static_cast<double>(nr) -
                            total * total / static_cast<double>(n);
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = static_cast<std::int32_t>(f);
          double mid = v0 + (v1 - v0) / 2.0;
          if (!(mid < v1)) mid = v0;
          best_threshold = mid;
          best_split = nl;
        }
      }
    }
    if (best_feature < 0) return id;

    // Partition every ordering so the node's left samples come first.
    const auto bf = static_cast<std::size_t>(best_feature);
    const auto& ob = order_[bf];
    for (std::size_t i = b; i < e; ++i) goes_left_[ob[i]] = i - b < best_split ? 1 : 0;
    for (std::size_t f = 0; f < x_.cols; ++f) {
      auto& o = order_[f];
      std::size_t l = b, r = 0;
      for (std::size_t i = b; i < e; ++i) {
        if (goes_left_[o[i]]) o[l++] = o[i];
        else scratch_[r++] = o[i];
      }
      std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(r),
                o.begin() + static_cast<std::ptrdiff_t>(l));
    }

    const std::size_t mid = b + best_split;
    const auto l = grow(t, b, mid, depth + 1);
    const auto r = grow(t, mid, e, depth + 1);
    Node& node = t.nodes[static_cast<std::size_t>(id)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  const Matrix& x_;
  const std::vector<std::size_t>& samples_;
  std::vector<std::vector<std::uint32_t>> order_;  // private copy, partitioned in place
  TreeParams params_;
  std::vector<double> y_;
  std::vector<unsigned char> goes_left_;
  std::vector<std::uint32_t> scratch_;
};

}  // namespace detail

// Fits a regression tree to target[samples[i]] over the presorted rows.
inline RegressionTree fit(const Presorted& data, std::span<const double> target, const TreeParams& params) {
  return detail::Builder(data, target, params).build();
}

inline RegressionTree fit(const Matrix& x, std::span<const double> y, const TreeParams& params) {
  std::vector<std::size_t> all(x.rows);
  std::iota(all.begin(), all.end(), std::size_t{0});
  return fit(Presorted(x, std::move(all)), y, params);
}

}  // namespace aqs::ml::tree
