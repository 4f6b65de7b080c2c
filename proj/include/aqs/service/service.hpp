#pragma once

#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "aqs/core/error.hpp"
#include "aqs/dataset/observation.hpp"
#include "aqs/dataset/station.hpp"
#include "aqs/grid/surface.hpp"
#include "aqs/ml/model.hpp"
#include "aqs/pipeline/rasters.hpp"
#include "aqs/pipeline/workflow.hpp"
#include "aqs/service/catalog.hpp"
#include "aqs/service/scenario.hpp"
#include "aqs/service/store.hpp"

namespace aqs::service {

// The scenario exists but has not finished (or failed).
class NotReady : public Error {
 public:
  using Error::Error;
};

struct RunOutput {
  ScenarioResult result;
  ml::TrainedModel model;
  grid::PredictionSurface surface;
};

// build table -> clean -> split -> grid search when applicable -> train ->
// evaluate -> yearly composites -> surface.
inline RunOutput run_scenario(const CityEntry& city, const ScenarioConfig& cfg, const std::string& id,
                              const std::string& dataset_version) {
  using clock = std::chrono::steady_clock;
  const auto secs = [](clock::time_point a, clock::time_point b) { return std::chrono::duration<double>(b - a).count(); };
  const auto t0 = clock::now();

  pipeline::DatasetRequest req;
  req.area = city.area;
  req.stations = dataset::load_stations(city.stations);
  req.observations = dataset::load_ground_truth(city.ground_truth).observations;
  req.raster_dir = city.rasters;
  req.year = cfg.year;
  req.pollutant = cfg.pollutant;
  req.features = cfg.factors;
  const auto ds = pipeline::build_dataset(req);
  const auto t1 = clock::now();

  pipeline::TrainRequest tr;
  tr.kind = cfg.kind;
  tr.factors = cfg.factors;
  tr.seed = cfg.seed;
  tr.grid = cfg.grid;
  auto trained = pipeline::train_on_table(ds.cleaned.table, tr);
  const auto t2 = clock::now();

  const auto composites = pipeline::yearly_composites(ds.rasters, cfg.year, cfg.factors);
  auto surface = pipeline::predict_area(trained.model, city.area, composites, id, cfg.pollutant);
  const auto t3 = clock::now();

  RunOutput out;
  auto& r = out.result;
  r.id = id;
  r.config = cfg;
  r.dataset_version = dataset_version;
  r.status = Status::done;
  r.metrics = std::move(trained.test_metrics);
  r.hyperparameters = trained.model.params;
  r.rows = ds.cleaned.table.size();
  r.rows_removed = ds.cleaned.removed;
  r.n_train = trained.n_train;
  r.n_test = trained.n_test;
  r.timings = {secs(t0, t1), secs(t1, t2), secs(t2, t3), secs(t0, t3)};
  out.model = std::move(trained.model);
  out.surface = std::move(surface);
  return out;
}

// Scenario registry plus a bounded worker pool. The registry mutex is only
// held for map reads and writes, never while a job runs, so status queries
// return promptly whatever the workers are doing.
class ScenarioService {
 public:
  struct Created {
    std::string id;
    bool cached = false;  // config was already known
    Status status = Status::pending;
  };

  ScenarioService(Catalog catalog, const fs::path& store_dir, std::size_t workers = 2)
      : catalog_(std::move(catalog)), store_(store_dir) {
    if (workers < 1) throw UsageError("service needs at least one worker");
    restore_report_ = store_.load_all(catalog_);
    for (auto& s : restore_report_.loaded) {
      Entry e;
      e.result = std::move(s.result);
      e.model = std::make_shared<const ml::TrainedModel>(std::move(s.model));
      e.surface = std::make_shared<const grid::PredictionSurface>(std::move(s.surface));
      const std::string id = e.result.id;
      entries_.emplace(id, std::move(e));
    }
    restore_report_.loaded.clear();
    for (std::size_t i = 0; i < workers; ++i) workers_.emplace_back([this] { worker_loop(); });
  }

  ~ScenarioService() { stop(); }
  ScenarioService(const ScenarioService&) = delete;
  ScenarioService& operator=(const ScenarioService&) = delete;

  void stop() {
    {
      std::lock_guard lock(mu_);
      if (stopping_) return;
      stopping_ = true;
    }
    queue_cv_.notify_all();
    for (auto& w : workers_)
      if (w.joinable()) w.join();
  }

  const Catalog& catalog() const { return catalog_; }
  json catalog_summary() const { return service::catalog_summary(catalog_); }
  const LoadReport& restore_report() const { return restore_report_; }

  Created create(const json& body) { return create(config_from_json(body, catalog_)); }

  // Identical configs map to one id. A failed scenario is queued again.
  Created create(const ScenarioConfig& cfg) {
    const std::string id = scenario_id(cfg, catalog_.version);
    {
      std::lock_guard lock(mu_);
      auto it = entries_.find(id);
      if (it != entries_.end() && it->second.result.status != Status::failed)
        return {id, true, it->second.result.status};
      Entry e;
      e.result.id = id;
      e.result.config = cfg;
      e.result.dataset_version = catalog_.version;
      e.result.status = Status::pending;
      entries_.insert_or_assign(id, std::move(e));
      queue_.push_back(id);
      ++enqueued_;
    }
    queue_cv_.notify_one();
    return {id, false, Status::pending};
  }

  ScenarioResult get(const std::string& id) const {
    std::lock_guard lock(mu_);
    return find(id).result;
  }

  std::vector<ScenarioResult> list() const {
    std::lock_guard lock(mu_);
    std::vector<ScenarioResult> out;
    for (const auto& [_, e] : entries_) out.push_back(e.result);
    return out;
  }

  std::shared_ptr<const grid::PredictionSurface> surface(const std::string& id) const {
    std::lock_guard lock(mu_);
    const auto& e = find(id);
    if (!e.surface) throw NotReady("scenario " + id + " is " + name_of(e.result.status) + "; no surface yet");
    return e.surface;
  }

  std::shared_ptr<const ml::TrainedModel> model(const std::string& id) const {
    std::lock_guard lock(mu_);
    const auto& e = find(id);
    if (!e.model) throw NotReady("scenario " + id + " is " + name_of(e.result.status) + "; no model yet");
    return e.model;
  }

  // Blocks until the scenario is done or failed, or the timeout passes.
  ScenarioResult wait(const std::string& id, std::chrono::milliseconds timeout) const {
    std::unique_lock lock(mu_);
    done_cv_.wait_for(lock, timeout, [&] {
      const auto s = find(id).result.status;
      return s == Status::done || s == Status::failed;
    });
    return find(id).result;
  }

  std::size_t jobs_executed() const { return executed_.load(); }
  std::size_t jobs_enqueued() const {
    std::lock_guard lock(mu_);
    return enqueued_;
  }
  std::size_t worker_count() const { return workers_.size(); }
  std::size_t scenario_count() const {
    std::lock_guard lock(mu_);
    return entries_.size();
  }

 private:
  struct Entry {
    ScenarioResult result;
    std::shared_ptr<const ml::TrainedModel> model;
    std::shared_ptr<const grid::PredictionSurface> surface;
  };

  const Entry& find(const std::string& id) const {
    auto it = entries_.find(id);
    if (it == entries_.end()) throw NotFound("unknown scenario '" + id + "'");
    return it->second;
  }

  void worker_loop() {
    for (;;) {
      std::string id;
      ScenarioConfig cfg;
      {
        std::unique_lock lock(mu_);
        queue_cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
        if (stopping_) return;
        id = queue_.front();
        queue_.pop_front();
        auto& e = entries_.at(id);
        e.result.status = Status::running;
        cfg = e.result.config;
      }
      ++executed_;
      const CityEntry* city = catalog_.find(cfg.city);
      try {
        if (!city) throw DataError("city '" + cfg.city + "' vanished from the catalog");
        auto out = run_scenario(*city, cfg, id, catalog_.version);
        store_.persist(out.result, out.model, out.surface);
        std::lock_guard lock(mu_);
        auto& e = entries_.at(id);
        e.result = std::move(out.result);
        e.model = std::make_shared<const ml::TrainedModel>(std::move(out.model));
        e.surface = std::make_shared<const grid::PredictionSurface>(std::move(out.surface));
      } catch (const std::exception& ex) {
        std::lock_guard lock(mu_);
        auto& e = entries_.at(id);
        e.result.status = Status::failed;
        e.result.reason = ex.what();
        if (e.result.reason.empty()) e.result.reason = "unknown error";
      }
      done_cv_.notify_all();
    }
  }

  const Catalog catalog_;
  Store store_;
  LoadReport restore_report_;
  mutable std::mutex mu_;
  std::condition_variable queue_cv_;
  mutable std::condition_variable done_cv_;
  std::map<std::string, Entry> entries_;
  std::deque<std::string> queue_;
  std::size_t enqueued_ = 0;
  std::atomic<std::size_t> executed_{0};
  bool stopping_ = false;
  std::vector<std::thread> workers_;
};

}  // namespace aqs::service
