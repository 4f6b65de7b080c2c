#pragma once

#include <nlohmann/json.hpp>

#include <string>

#include "aqs/core/error.hpp"
#include "aqs/ml/grid_search.hpp"
#include "aqs/ml/metrics.hpp"
#include "aqs/ml/model.hpp"

namespace aqs::ml {

using nlohmann::json;

inline constexpr int kModelFormatVersion = 1;

inline json to_json(const HyperParams& hp) {
  return std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LinearParams>) {
          return json::object();
        } else if constexpr (std::is_same_v<T, ForestParams>) {
          return {{"n_trees", p.n_trees},
                  {"max_depth", p.max_depth ? json(*p.max_depth) : json(nullptr)},
                  {"min_samples_leaf", p.min_samples_leaf},
                  {"bootstrap", p.bootstrap}};
        } else if constexpr (std::is_same_v<T, SvrParams>) {
          return {{"C", p.c}, {"epsilon", p.epsilon}, {"rbf_gamma", p.gamma ? json(*p.gamma) : json(nullptr)}};
        } else {
          return {{"n_stages", p.n_stages}, {"learning_rate", p.learning_rate}, {"max_depth", p.max_depth}};
        }
      },
      hp);
}

// Applies every key of `j` on top of the kind's defaults.
inline HyperParams params_from_json(ModelKind kind, const json& j) {
  HyperParams hp = default_params(kind);
  if (j.is_null()) return hp;
  if (!j.is_object()) throw DataError("hyperparameters must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (v.is_null()) apply_param(hp, key, std::nullopt);
    else if (v.is_boolean()) apply_param(hp, key, v.get<bool>() ? 1.0 : 0.0);
    else if (v.is_number()) apply_param(hp, key, v.get<double>());
    else throw DataError("hyperparameter '" + key + "' must be a number, boolean or null");
  }
  validate(hp);
  return hp;
}

// Grid file: {"param": [values...], ...}; booleans map to 0/1, null allowed.
inline ParamGrid grid_from_json(const json& j) {
  if (!j.is_object()) throw DataError("grid must be a JSON object of value lists");
  ParamGrid g;
  for (const auto& [key, vals] : j.items()) {
    if (!vals.is_array() || vals.empty()) throw DataError("grid entry '" + key + "' must be a non-empty array");
    auto& out = g[key];
    for (const auto& v : vals) {
      if (v.is_null()) out.emplace_back(std::nullopt);
      else if (v.is_boolean()) out.emplace_back(v.get<bool>() ? 1.0 : 0.0);
      else if (v.is_number()) out.emplace_back(v.get<double>());
      else throw DataError("grid entry '" + key + "' contains a non-numeric value");
    }
  }
  return g;
}

inline json grid_to_json(const ParamGrid& g) {
  json j = json::object();
  for (const auto& [k, vals] : g) {
    json arr = json::array();
    for (const auto& v : vals) arr.push_back(v ? json(*v) : json(nullptr));
    j[k] = arr;
  }
  return j;
}

namespace detail {

inline json tree_to_json(const tree::RegressionTree& t) {
  json feature = json::array(), threshold = json::array(), left = json::array(), right = json::array(),
       value = json::array();
  for (const auto& n : t.nodes) {
    feature.push_back(n.feature);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
    value.push_back(n.value);
  }
  return {{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right}, {"value", value}};
}

inline tree::RegressionTree tree_from_json(const json& j, std::size_t arity) {
  tree::RegressionTree t;
  const auto& f = j.at("feature");
  const std::size_t n = f.size();
  if (n == 0) throw DataError("model JSON: empty tree");
  for (const char* key : {"threshold", "left", "right", "value"})
    if (j.at(key).size() != n) throw DataError("model JSON: tree arrays differ in length");
  t.nodes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& node = t.nodes[i];
    node.feature = f[i].get<std::int32_t>();
    node.threshold = j["threshold"][i].get<double>();
    node.left = j["left"][i].get<std::int32_t>();
    node.right = j["right"][i].get<std::int32_t>();
    node.value = j["value"][i].get<double>();
    if (node.feature >= 0) {
      const auto ok = [&](std::int32_t c) { return c > static_cast<std::int32_t>(i) && c < static_cast<std::int32_t>(n); };
      if (static_cast<std::size_t>(node.feature) >= arity || !ok(node.left) || !ok(node.right))
        throw DataError("model JSON: malformed tree node " + std::to_string(i));
    }
  }
  return t;
}

}  // namespace detail

inline json to_json(const TrainedModel& m) {
  json params = std::visit(
      [](const auto& f) -> json {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, linear::LinearFit>) {
          return {{"weights", f.weights}, {"intercept", f.intercept}, {"ridge_fallback", f.ridge_fallback}};
        } else if constexpr (std::is_same_v<T, forest::ForestFit>) {
          json trees = json::array();
          for (const auto& t : f.trees) trees.push_back(detail::tree_to_json(t));
          return {{"trees", trees}};
        } else if constexpr (std::is_same_v<T, svr::SvrFit>) {
          json sv = json::array();
          for (std::size_t i = 0; i < f.support.rows; ++i) {
            auto r = f.support.row(i);
            sv.push_back(std::vector<double>(r.begin(), r.end()));
          }
          return {{"gamma", f.gamma}, {"C", f.c}, {"epsilon", f.epsilon}, {"bias", f.bias}, {"support_vectors", sv},
                  {"alpha", f.alpha}, {"alpha_star", f.alpha_star}, {"iterations", f.iterations}};
        } else {
          json stages = json::array();
          for (const auto& t : f.stages) stages.push_back(detail::tree_to_json(t));
          return {{"initial", f.initial}, {"learning_rate", f.learning_rate}, {"stages", stages},
                  {"train_mse", f.train_mse}};
        }
      },
      m.fitted);
  return {{"format_version", kModelFormatVersion},
          {"kind", name_of(m.kind)},
          {"feature_names", m.feature_names},
          {"standardization",
           {{"mean", m.scaler.mean}, {"stddev", m.scaler.stddev}, {"dropped", m.scaler.dropped}}},
          {"seed", m.seed},
          {"hyperparameters", to_json(m.params)},
          {"parameters", params}};
}

inline TrainedModel model_from_json(const json& j) {
  try {
    if (j.at("format_version").get<int>() != kModelFormatVersion)
      throw DataError("unsupported model format_version " + j.at("format_version").dump());
    TrainedModel m;
    m.kind = parse_kind(j.at("kind").get<std::string>());
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    if (m.feature_names.empty()) throw DataError("model JSON: feature_names is empty");
    const auto& st = j.at("standardization");
    m.scaler.mean = st.at("mean").get<std::vector<double>>();
    m.scaler.stddev = st.at("stddev").get<std::vector<double>>();
    m.scaler.dropped = st.at("dropped").get<std::vector<std::size_t>>();
    const std::size_t p = m.feature_names.size();
    if (m.scaler.mean.size() != p || m.scaler.stddev.size() != p)
      throw DataError("model JSON: standardization arrays do not match feature count");
    for (std::size_t k = 0; k < p; ++k) {
      if (!(m.scaler.stddev[k] > 0.0)) throw DataError("model JSON: stddev entries must be positive");
      if (std::find(m.scaler.dropped.begin(), m.scaler.dropped.end(), k) == m.scaler.dropped.end())
        m.scaler.active.push_back(k);
    }
    m.seed = j.at("seed").get<std::uint64_t>();
    m.params = params_from_json(m.kind, j.at("hyperparameters"));
    const auto& pj = j.at("parameters");
    const std::size_t q = m.scaler.active.size();
    switch (m.kind) {
      case ModelKind::linear: {
        linear::LinearFit f;
        f.weights = pj.at("weights").get<std::vector<double>>();
        f.intercept = pj.at("intercept").get<double>();
        f.ridge_fallback = pj.at("ridge_fallback").get<bool>();
        if (f.weights.size() != q) throw DataError("model JSON: weight count does not match active features");
        m.fitted = std::move(f);
        break;
      }
      case ModelKind::random_forest: {
        forest::ForestFit f;
        for (const auto& t : pj.at("trees")) f.trees.push_back(detail::tree_from_json(t, q));
        if (f.trees.empty()) throw DataError("model JSON: forest has no trees");
        m.fitted = std::move(f);
        break;
      }
      case ModelKind::svr: {
        svr::SvrFit f;
        f.gamma = pj.at("gamma").get<double>();
        f.c = pj.at("C").get<double>();
        f.epsilon = pj.at("epsilon").get<double>();
        f.bias = pj.at("bias").get<double>();
        f.alpha = pj.at("alpha").get<std::vector<double>>();
        f.alpha_star = pj.at("alpha_star").get<std::vector<double>>();
        f.iterations = pj.at("iterations").get<long>();
        std::vector<std::vector<double>> sv = pj.at("support_vectors").get<std::vector<std::vector<double>>>();
        f.support = Matrix(sv.size(), q);
        for (std::size_t i = 0; i < sv.size(); ++i) {
          if (sv[i].size() != q) throw DataError("model JSON: support vector has wrong width");
          for (std::size_t k = 0; k < q; ++k) f.support(i, k) = sv[i][k];
        }
        if (f.alpha.size() != sv.size() || f.alpha_star.size() != sv.size())
          throw DataError("model JSON: dual coefficient count does not match support vectors");
        m.fitted = std::move(f);
        break;
      }
      case ModelKind::gradient_boosting: {
        boosting::BoostingFit f;
        f.initial = pj.at("initial").get<double>();
        f.learning_rate = pj.at("learning_rate").get<double>();
        for (const auto& t : pj.at("stages")) f.stages.push_back(detail::tree_from_json(t, q));
        f.train_mse = pj.at("train_mse").get<std::vector<double>>();
        m.fitted = std::move(f);
        break;
      }
    }
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("model JSON: ") + e.what());
  }
}

inline json to_json(const MetricsReport& r) {
  json pairs = json::array();
  for (const auto& [a, p] : r.pairs) pairs.push_back({a, p});
  return {{"r2", r.r2},
          {"mae", r.mae},
          {"mse", r.mse},
          {"mape", r.mape ? json(*r.mape) : json(nullptr)},
          {"rmse", r.rmse},
          {"mape_excluded", r.mape_excluded},
          {"n", r.pairs.size()},
          {"pairs", pairs}};
}

inline MetricsReport metrics_from_json(const json& j) {
  try {
    MetricsReport r;
    r.r2 = j.at("r2").get<double>();
    r.mae = j.at("mae").get<double>();
    r.mse = j.at("mse").get<double>();
    if (!j.at("mape").is_null()) r.mape = j.at("mape").get<double>();
    r.rmse = j.at("rmse").get<double>();
    r.mape_excluded = j.at("mape_excluded").get<std::size_t>();
    for (const auto& p : j.at("pairs")) r.pairs.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    return r;
  } catch (const json::exception& e) {
    throw DataError(std::string("metrics JSON: ") + e.what());
  }
}

inline json to_json(const GridSearchResult& g) {
  json evaluated = json::array();
  for (const auto& e : g.evaluated) evaluated.push_back({{"params", to_json(e.params)}, {"mean_cv_r2", e.mean_score}});
  return {{"cv_folds", g.cv_folds}, {"best", to_json(g.best)}, {"evaluated", evaluated}};
}

}  // namespace aqs::ml
