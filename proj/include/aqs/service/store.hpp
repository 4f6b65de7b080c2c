#pragma once

#include <nlohmann/json.hpp>

#include <atomic>
#include <filesystem>
#include <string>
#include <vector>

#include "aqs/core/error.hpp"
#include "aqs/core/files.hpp"
#include "aqs/grid/surface.hpp"
#include "aqs/ml/serialize.hpp"
#include "aqs/service/catalog.hpp"
#include "aqs/service/scenario.hpp"

namespace aqs::service {

struct StoredScenario {
  ScenarioResult result;
  ml::TrainedModel model;
  grid::PredictionSurface surface;
};

struct LoadReport {
  std::vector<StoredScenario> loaded;
  std::vector<std::string> quarantined;  // directory names moved aside
  std::vector<std::string> warnings;
};

// Layout: <dir>/<id>/{result.json, model.json, surface.json}. A scenario
// directory appears only through a rename of a fully written temp
// directory, so a partial one can only be a crash artifact.
class Store {
 public:
  static constexpr const char* kQuarantine = "quarantine";
  static constexpr const char* kTempPrefix = ".tmp-";

  explicit Store(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  const fs::path& dir() const { return dir_; }

  void persist(const ScenarioResult& r, const ml::TrainedModel& model, const grid::PredictionSurface& surface) {
    if (r.status != Status::done) throw Error("only finished scenarios are persisted");
    const fs::path final_dir = dir_ / r.id;
    if (fs::exists(final_dir)) return;  // done results are immutable
    const fs::path tmp = dir_ / (std::string(kTempPrefix) + r.id + "-" + std::to_string(counter_++));
    fs::create_directories(tmp);
    files::write_atomic(tmp / "model.json", ml::to_json(model).dump() + "\n");
    files::write_atomic(tmp / "surface.json", grid::to_json(surface).dump() + "\n");
    files::write_atomic(tmp / "result.json", to_json(r).dump(2) + "\n");
    std::error_code ec;
    fs::rename(tmp, final_dir, ec);
    if (ec) {
      fs::remove_all(tmp);
      if (!fs::exists(final_dir)) throw Error("cannot publish scenario " + r.id + ": " + ec.message());
    }
  }

  // Restores every complete scenario; anything else is moved to quarantine/.
  LoadReport load_all(const Catalog& cat) {
    LoadReport report;
    std::vector<fs::path> entries;
    for (const auto& e : fs::directory_iterator(dir_)) {
      if (e.path().filename() == kQuarantine) continue;
      entries.push_back(e.path());
    }
    std::sort(entries.begin(), entries.end());
    for (const auto& path : entries) {
      const std::string name = path.filename().string();
      try {
        if (!fs::is_directory(path)) throw DataError("not a scenario directory");
        if (name.rfind(kTempPrefix, 0) == 0) throw DataError("incomplete write");
        report.loaded.push_back(load_one(path, cat));
      } catch (const Error& e) {
        report.warnings.push_back(name + ": " + e.what());
        report.quarantined.push_back(quarantine(path));
      } catch (const fs::filesystem_error& e) {
        report.warnings.push_back(name + ": " + e.what());
        report.quarantined.push_back(quarantine(path));
      }
    }
    return report;
  }

 private:
  static json read_json(const fs::path& p) {
    if (!fs::is_regular_file(p)) throw DataError("missing " + p.filename().string());
    try {
      return json::parse(files::read_text(p));
    } catch (const json::parse_error& e) {
      throw DataError("corrupt " + p.filename().string() + ": " + e.what());
    }
  }

  static StoredScenario load_one(const fs::path& path, const Catalog& cat) {
    const auto rj = read_json(path / "result.json");
    const auto mj = read_json(path / "model.json");
    const auto sj = read_json(path / "surface.json");
    StoredScenario s{result_from_json(rj, cat), ml::model_from_json(mj), grid::surface_from_json(sj)};
    if (s.result.id != path.filename().string()) throw DataError("result id does not match its directory");
    if (s.result.status != Status::done) throw DataError("stored scenario is not done");
    if (s.result.dataset_version != cat.version)
      throw DataError("dataset version '" + s.result.dataset_version + "' differs from catalog '" + cat.version + "'");
    if (scenario_id(s.result.config, s.result.dataset_version) != s.result.id)
      throw DataError("result id does not match its config");
    return s;
  }

  std::string quarantine(const fs::path& path) {
    const fs::path qdir = dir_ / kQuarantine;
    fs::create_directories(qdir);
    std::string base = path.filename().string();
    if (!base.empty() && base.front() == '.') base.erase(0, 1);
    fs::path target = qdir / base;
    for (int n = 1; fs::exists(target); ++n) target = qdir / (base + "." + std::to_string(n));
    fs::rename(path, target);
    return target.filename().string();
  }

  fs::path dir_;
  std::atomic<unsigned> counter_{0};
};

}  // namespace aqs::service
