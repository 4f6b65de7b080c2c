#pragma once

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>

#include "aqs/core/error.hpp"
#include "aqs/core/files.hpp"
#include "aqs/core/text.hpp"

namespace aqs::service {

namespace fs = std::filesystem;
using nlohmann::json;

// Relative paths in the file resolve against the file's directory.
// Environment overrides: AQS_STORE_DIR, AQS_CATALOG, AQS_PORT, AQS_WORKERS.
struct ServiceConfig {
  fs::path catalog;
  fs::path store_dir = "store";
  std::string host = "127.0.0.1";
  int port = 8080;
  std::size_t workers = 2;
  std::optional<fs::path> static_dir;  // served at / when set
};

namespace detail {

inline int parse_port(const std::string& s, const std::string& origin) {
  const auto v = text::parse_int<int>(s);
  if (!v || *v < 0 || *v > 65535) throw UsageError(origin + ": port must be an integer in [0, 65535]");
  return *v;
}

inline std::size_t parse_workers(long long v, const std::string& origin) {
  if (v < 1 || v > 64) throw UsageError(origin + ": workers must be in [1, 64]");
  return static_cast<std::size_t>(v);
}

}  // namespace detail

inline ServiceConfig config_from_json(const json& j, const fs::path& base, const std::string& origin) {
  if (!j.is_object()) throw UsageError(origin + ": config must be a JSON object");
  ServiceConfig c;
  const auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "catalog") c.catalog = resolve(v.get<std::string>());
      else if (key == "store_dir") c.store_dir = resolve(v.get<std::string>());
      else if (key == "host") c.host = v.get<std::string>();
      else if (key == "port") c.port = detail::parse_port(std::to_string(v.get<long long>()), origin);
      else if (key == "workers") c.workers = detail::parse_workers(v.get<long long>(), origin);
      else if (key == "static_dir") {
        if (!v.is_null()) c.static_dir = resolve(v.get<std::string>());
      } else {
        throw UsageError(origin + ": unknown config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw UsageError(origin + ": " + e.what());
  }
  if (!j.contains("store_dir")) c.store_dir = base / c.store_dir;
  return c;
}

inline void apply_env(ServiceConfig& c) {
  if (const char* v = std::getenv("AQS_STORE_DIR"); v && *v) c.store_dir = v;
  if (const char* v = std::getenv("AQS_CATALOG"); v && *v) c.catalog = v;
  if (const char* v = std::getenv("AQS_PORT"); v && *v) c.port = detail::parse_port(v, "AQS_PORT");
  if (const char* v = std::getenv("AQS_WORKERS"); v && *v) {
    const auto n = text::parse_int<long long>(v);
    if (!n) throw UsageError("AQS_WORKERS: not an integer");
    c.workers = detail::parse_workers(*n, "AQS_WORKERS");
  }
}

inline ServiceConfig load_config(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw UsageError("config file not found: " + path.string());
  json j;
  try {
    j = json::parse(files::read_text(path));
  } catch (const json::parse_error& e) {
    throw UsageError(path.string() + ": invalid JSON: " + e.what());
  }
  auto c = config_from_json(j, fs::absolute(path).parent_path(), path.string());
  apply_env(c);
  if (c.catalog.empty()) throw UsageError(path.string() + ": 'catalog' is required");
  return c;
}

}  // namespace aqs::service
