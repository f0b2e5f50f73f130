// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <echo/catalog/catalog.hpp>
#include <echo/catalog/catalog_client.hpp>
#include <echo/common/proc_stats.hpp>
#include <echo/common/subprocess.hpp>

#include <json.hpp>

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

namespace echo::agent {

struct Capacity {
    std::int64_t cpu_millis = 0;
    std::int64_t mem_mb = 0;
};

struct DeviceInfo {
    std::string id;///< defaults to 12 random hex digits
    std::string device_class = "edge";///< edge | fog | cloud
    Capacity capacity{4000, 1024};
    std::vector<std::string> tags;///< accelerators and other constraint tags
    std::string visibility = "public";
    std::set<std::string> reachable_from{"*"};
    std::string profile = "unthrottled";///< throttle profile of spawned workers
    std::string endpoint;///< filled in once the REST server is bound

    static DeviceInfo from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;
    catalog::CatalogItem to_item() const;
    /// Throws ValidationError.
    void validate() const;
};

struct AgentConfig {
    DeviceInfo device;
    std::string catalog_url;
    std::string listen = "127.0.0.1:0";
    std::chrono::milliseconds heartbeat{5000};
    std::filesystem::path engine_binary;///< program run as "<binary> engine ..."
    std::filesystem::path workdir;
    std::chrono::milliseconds worker_health_timeout{10000};

    /// From {id, class, capacity:{cpu_millis,mem_mb}, tags, visibility,
    /// reachable_from, profile, catalog_url, listen, heartbeat_ms}.
    static AgentConfig from_json(const nlohmann::json& doc);
};

enum class WorkerState { starting, up, down };
std::string to_string(WorkerState s);

struct WorkerSandbox {
    std::string id;
    std::string device;
    Capacity caps;
    std::string profile;
    std::string endpoint;
    WorkerState state = WorkerState::starting;
    std::string started_at;
    std::string stopped_at;
    int pid = 0;

    nlohmann::json to_json() const;
    catalog::CatalogItem to_item() const;
};

/// The device service: registers the device, runs engine workers as child
/// processes within the device capacity and keeps the catalog informed.
class Agent {
  public:
    explicit Agent(AgentConfig config);
    ~Agent();

    Agent(const Agent&) = delete;
    Agent& operator=(const Agent&) = delete;

    /// Waits for the catalog (retrying until `give_up` elapses, forever when
    /// zero), refuses a live duplicate device id with Conflict, registers the
    /// device and starts the monitor loop.
    void bootstrap(const std::string& endpoint, std::chrono::milliseconds give_up = std::chrono::milliseconds(0));

    /// Throws CapacityError naming the remaining headroom, UnreachableError
    /// when the engine never becomes healthy.
    WorkerSandbox spawn_worker(Capacity caps, const std::string& profile);
    /// Throws NotFound.
    void terminate_worker(const std::string& id);

    nlohmann::json status() const;
    /// Allotted caps of workers that are not down.
    Capacity allotted() const;
    const DeviceInfo& device() const noexcept { return config_.device; }
    const AgentConfig& config() const noexcept { return config_; }

    /// One monitor pass: detects dead workers and writes heartbeats/utilisation.
    void monitor_once();
    void shutdown();

  private:
    struct Worker {
        WorkerSandbox info;
        Subprocess process;
        CpuMeter meter;
    };

    void monitor_loop();
    void publish(const catalog::CatalogItem& item) const;
    void mark_down(Worker& w);

    AgentConfig config_;
    catalog::CatalogClient catalog_;
    mutable std::mutex spawn_mu_;///< serializes spawn/terminate
    mutable std::mutex mu_;
    std::map<std::string, std::unique_ptr<Worker>> workers_;
    std::uint64_t next_worker_ = 1;
    CpuMeter device_meter_;

    std::mutex loop_mu_;
    std::condition_variable loop_cv_;
    bool stopping_ = false;
    std::thread monitor_;
};

/// Runs the agent REST service until SIGTERM:
///   POST /workers {"caps":{...},"profile":str} -> {"worker_id","endpoint"}
///   DELETE /workers/{id}, GET /status, GET /health.
int run_agent(AgentConfig config);

}// namespace echo::agent
