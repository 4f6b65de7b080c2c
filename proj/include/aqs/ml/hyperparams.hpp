#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "aqs/core/error.hpp"
#include "aqs/ml/boosting.hpp"
#include "aqs/ml/forest.hpp"
#include "aqs/ml/svr.hpp"

namespace aqs::ml {

enum class ModelKind { linear, random_forest, svr, gradient_boosting };

inline constexpr ModelKind kAllKinds[] = {ModelKind::linear, ModelKind::random_forest, ModelKind::svr,
                                          ModelKind::gradient_boosting};

inline std::string_view name_of(ModelKind k) {
  switch (k) {
    case ModelKind::linear: return "linear";
    case ModelKind::random_forest: return "random_forest";
    case ModelKind::svr: return "svr";
    case ModelKind::gradient_boosting: return "gradient_boosting";
  }
  return "?";
}

inline ModelKind parse_kind(std::string_view s) {
  for (auto k : kAllKinds)
    if (name_of(k) == s) return k;
  throw UsageError("unknown model kind '" + std::string(s) +
                   "' (valid kinds: linear, random_forest, svr, gradient_boosting)");
}

struct LinearParams {};
using forest::ForestParams;
using svr::SvrParams;
using boosting::BoostingParams;

using HyperParams = std::variant<LinearParams, ForestParams, SvrParams, BoostingParams>;

inline HyperParams default_params(ModelKind k) {
  switch (k) {
    case ModelKind::linear: return LinearParams{};
    case ModelKind::random_forest: return ForestParams{};
    case ModelKind::svr: return SvrParams{};
    case ModelKind::gradient_boosting: return BoostingParams{};
  }
  return LinearParams{};
}

inline ModelKind kind_of(const HyperParams& p) { return static_cast<ModelKind>(p.index()); }

inline void validate(const HyperParams& hp) {
  struct V {
    void operator()(const LinearParams&) const {}
    void operator()(const ForestParams& p) const {
      if (p.n_trees < 1) throw UsageError("n_trees must be >= 1");
      if (p.max_depth && *p.max_depth < 1) throw UsageError("max_depth must be >= 1");
      if (p.min_samples_leaf < 1) throw UsageError("min_samples_leaf must be >= 1");
    }
    void operator()(const SvrParams& p) const {
      if (!(p.c > 0.0)) throw UsageError("C must be positive");
      if (!(p.epsilon > 0.0)) throw UsageError("epsilon must be positive");
      if (p.gamma && !(*p.gamma > 0.0)) throw UsageError("rbf_gamma must be positive");
    }
    void operator()(const BoostingParams& p) const {
      if (p.n_stages < 1) throw UsageError("n_stages must be >= 1");
      if (!(p.learning_rate > 0.0)) throw UsageError("learning_rate must be positive");
      if (p.max_depth < 1) throw UsageError("max_depth must be >= 1 (stumps of depth 0 are not allowed)");
    }
  };
  std::visit(V{}, hp);
}

// A grid value: a number, or null (unbounded max_depth / default gamma).
// Booleans are 0 or 1.
using ParamValue = std::optional<double>;
// Keys enumerate in lexicographic order with the last key varying fastest.
using ParamGrid = std::map<std::string, std::vector<ParamValue>>;

namespace detail {
inline int as_int(const std::string& name, const ParamValue& v) {
  if (!v || *v != std::floor(*v)) throw UsageError("parameter '" + name + "' must be an integer");
  return static_cast<int>(*v);
}
inline double as_number(const std::string& name, const ParamValue& v) {
  if (!v) throw UsageError("parameter '" + name + "' must be a number");
  return *v;
}
}  // namespace detail

inline void apply_param(HyperParams& hp, const std::string& name, const ParamValue& v) {
  using detail::as_int;
  using detail::as_number;
  bool known = false;
  std::visit(
      [&](auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ForestParams>) {
          known = true;
          if (name == "n_trees") p.n_trees = as_int(name, v);
          else if (name == "max_depth") p.max_depth = v ? std::optional<int>(as_int(name, v)) : std::nullopt;
          else if (name == "min_samples_leaf") p.min_samples_leaf = as_int(name, v);
          else if (name == "bootstrap") p.bootstrap = as_number(name, v) != 0.0;
          else known = false;
        } else if constexpr (std::is_same_v<T, SvrParams>) {
          known = true;
          if (name == "C") p.c = as_number(name, v);
          else if (name == "epsilon") p.epsilon = as_number(name, v);
          else if (name == "rbf_gamma") p.gamma = v;
          else known = false;
        } else if constexpr (std::is_same_v<T, BoostingParams>) {
          known = true;
          if (name == "n_stages") p.n_stages = as_int(name, v);
          else if (name == "learning_rate") p.learning_rate = as_number(name, v);
          else if (name == "max_depth") p.max_depth = as_int(name, v);
          else known = false;
        }
      },
      hp);
  if (!known)
    throw UsageError("unknown hyperparameter '" + name + "' for model kind " + std::string(name_of(kind_of(hp))));
}

// Cartesian product of the grid applied on top of `base`.
inline std::vector<HyperParams> expand_grid(const HyperParams& base, const ParamGrid& grid) {
  std::vector<HyperParams> out{base};
  for (const auto& [name, values] : grid) {
    if (values.empty()) throw UsageError("grid entry '" + name + "' has no values");
    std::vector<HyperParams> next;
    next.reserve(out.size() * values.size());
    for (const auto& hp : out) {
      for (const auto& v : values) {
        HyperParams p = hp;
        apply_param(p, name, v);
        next.push_back(std::move(p));
      }
    }
    out = std::move(next);
  }
  for (const auto& p : out) validate(p);
  return out;
}

// Grids searched when the caller supplies none.
inline ParamGrid default_grid(ModelKind k) {
  switch (k) {
    case ModelKind::random_forest:
      return {{"max_depth", {std::nullopt, 8.0, 16.0}}, {"min_samples_leaf", {1.0, 3.0}}, {"n_trees", {50.0, 100.0, 200.0}}};
    case ModelKind::gradient_boosting:
      return {{"learning_rate", {0.05, 0.1}}, {"max_depth", {2.0, 3.0}}, {"n_stages", {100.0, 300.0}}};
    default:
      return {};
  }
}

}  // namespace aqs::ml
