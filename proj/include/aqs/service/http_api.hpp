#pragma once

// Eigen (via service.hpp) must precede httplib: <resolv.h> defines a `_res`
// macro that breaks Eigen's headers.
#include "aqs/core/error.hpp"
#include "aqs/core/text.hpp"
#include "aqs/grid/export.hpp"
#include "aqs/ml/serialize.hpp"
#include "aqs/service/service.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <optional>
#include <string>

namespace aqs::service {

namespace detail {

inline void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

inline void send_error(httplib::Response& res, int status, const std::string& message,
                       const std::string& field = {}) {
  json body = {{"error", message}};
  if (!field.empty()) body["field"] = field;
  send_json(res, status, body);
}

// Maps library errors onto HTTP statuses.
template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const FieldError& e) {
    send_error(res, 400, e.what(), e.field());
  } catch (const NotFound& e) {
    send_error(res, 404, e.what());
  } catch (const NotReady& e) {
    send_error(res, 409, e.what());
  } catch (const UsageError& e) {
    send_error(res, 400, e.what());
  } catch (const DataError& e) {
    send_error(res, 422, e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, e.what());
  }
}

inline std::optional<std::string> param(const httplib::Request& req, const char* key) {
  if (!req.has_param(key)) return std::nullopt;
  return req.get_param_value(key);
}

inline double number_param(const httplib::Request& req, const char* key) {
  const auto v = param(req, key);
  if (!v) throw FieldError(key, std::string("query parameter '") + key + "' is required for a fixed legend");
  const auto d = text::parse_double(*v);
  if (!d) throw FieldError(key, std::string("query parameter '") + key + "' must be a number");
  return *d;
}

inline grid::LegendSpec legend_from_query(const httplib::Request& req) {
  int bins = grid::kDefaultLegendBins;
  if (const auto b = param(req, "bins")) {
    const auto n = text::parse_int<int>(*b);
    if (!n || *n < 1 || *n > 256) throw FieldError("bins", "bins must be an integer in [1, 256]");
    bins = *n;
  }
  const std::string mode = param(req, "legend").value_or("dynamic");
  if (mode == "dynamic") return grid::LegendSpec::dynamic(bins);
  if (mode == "fixed") {
    const double lo = number_param(req, "min"), hi = number_param(req, "max");
    if (!(lo < hi)) throw FieldError("min", "fixed legend requires min < max");
    return grid::LegendSpec::fixed(lo, hi, bins);
  }
  throw FieldError("legend", "legend must be 'dynamic' or 'fixed'");
}

}  // namespace detail

// Registers the JSON API on `server`:
//   GET  /api/health
//   GET  /api/catalog
//   GET  /api/scenarios
//   POST /api/scenarios
//   GET  /api/scenarios/{id}
//   GET  /api/scenarios/{id}/surface?format=geojson|csv&legend=dynamic|fixed&min=&max=&bins=
//   GET  /api/scenarios/{id}/model
inline void mount_api(httplib::Server& server, ScenarioService& svc) {
  using detail::guarded;
  using detail::send_json;

  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  server.Get("/api/health", [&svc](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200,
              {{"ok", true},
               {"scenarios", svc.scenario_count()},
               {"workers", svc.worker_count()},
               {"jobs_enqueued", svc.jobs_enqueued()},
               {"jobs_executed", svc.jobs_executed()}});
  });

  server.Get("/api/catalog", [&svc](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, svc.catalog_summary()); });
  });

  server.Get("/api/scenarios", [&svc](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] {
      json list = json::array();
      for (const auto& r : svc.list()) list.push_back({{"id", r.id}, {"status", name_of(r.status)}, {"config", to_json(r.config)}});
      send_json(res, 200, {{"scenarios", list}});
    });
  });

  server.Post("/api/scenarios", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      json body;
      try {
        body = json::parse(req.body);
      } catch (const json::parse_error& e) {
        throw FieldError("body", std::string("request body is not valid JSON: ") + e.what());
      }
      const auto created = svc.create(body);
      send_json(res, created.cached ? 200 : 202,
                {{"id", created.id}, {"status", name_of(created.status)}, {"cached", created.cached}});
    });
  });

  server.Get(R"(/api/scenarios/([0-9a-f]+))", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, to_json(svc.get(req.matches[1]))); });
  });

  server.Get(R"(/api/scenarios/([0-9a-f]+)/surface)", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string format = detail::param(req, "format").value_or("geojson");
      if (format != "geojson" && format != "csv") throw FieldError("format", "format must be 'geojson' or 'csv'");
      const auto legend = detail::legend_from_query(req);
      const auto surface = svc.surface(req.matches[1]);
      if (format == "csv") {
        res.status = 200;
        res.set_content(grid::to_csv(*surface), "text/csv");
      } else {
        res.status = 200;
        res.set_content(grid::to_geojson(*surface, grid::resolve_legend(*surface, legend)).dump(),
                        "application/geo+json");
      }
    });
  });

  server.Get(R"(/api/scenarios/([0-9a-f]+)/model)", [&svc](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, ml::to_json(*svc.model(req.matches[1]))); });
  });

  server.Get(R"(/api/.*)", [](const httplib::Request& req, httplib::Response& res) {
    detail::send_error(res, 404, "no route for " + req.path);
  });
}

}  // namespace aqs::service
