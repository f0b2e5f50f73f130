// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <echo/common/subprocess.hpp>

#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace echo::cli {

struct WorkerRequest {
    std::int64_t cpu_millis = 1000;
    std::int64_t mem_mb = 256;
    std::string profile;///< empty: the device's profile
};

struct DeviceConfig {
    nlohmann::json agent;///< agent config (id, class, capacity, ...)
    std::vector<WorkerRequest> workers;

    std::string id() const { return agent.value("id", std::string()); }
    std::string device_class() const { return agent.value("class", std::string("edge")); }
};

struct TestbedConfig {
    std::vector<DeviceConfig> devices;
    std::string catalog_listen = "127.0.0.1:0";
    std::string master_listen = "127.0.0.1:0";
    std::chrono::milliseconds heartbeat{5000};
    std::chrono::milliseconds metrics_interval{1000};
    std::filesystem::path workdir;///< logs and per-service files; empty: a temp dir

    /// Throws ValidationError (no devices, duplicate ids or fixed ports).
    static TestbedConfig from_json(const nlohmann::json& doc);
    static TestbedConfig load(const std::filesystem::path& path);
};

struct TestbedOptions {
    std::filesystem::path echo_binary;///< empty: ECHO_BIN or this executable
    std::set<std::string> defer_classes;///< device classes whose workers are not spawned at up()
    std::map<std::string, std::string> master_env;///< e.g. ECHO_FAULT_DELAY_MS
};

/// A whole deployment on loopback: catalog, master and one agent per device,
/// each a child process. Reachability between devices is enforced by the
/// engines' connection gate.
class Testbed {
  public:
    Testbed(TestbedConfig config, TestbedOptions options = {});
    ~Testbed();

    Testbed(const Testbed&) = delete;
    Testbed& operator=(const Testbed&) = delete;

    /// Throws IoError naming the service (and its listen address) that failed.
    void up();
    void down();

    const std::string& catalog_url() const noexcept { return catalog_url_; }
    const std::string& master_url() const noexcept { return master_url_; }
    const std::map<std::string, std::string>& agents() const noexcept { return agent_urls_; }
    const TestbedConfig& config() const noexcept { return config_; }

    /// Spawns the configured workers of every device in `device_class`.
    std::vector<std::string> spawn_workers(const std::string& device_class);
    std::string spawn_worker(const std::string& device, const WorkerRequest& request);
    nlohmann::json agent_status(const std::string& device) const;
    /// Worker id -> pid, over every agent.
    std::map<std::string, int> worker_pids() const;

    void kill_master(int signal);
    void start_master();

    /// Pids of every service child still running.
    std::vector<int> live_pids();
    nlohmann::json describe() const;

  private:
    int start_child(const std::string& name, std::vector<std::string> args, std::map<std::string, std::string> env,
                    const std::string& listen);

    TestbedConfig config_;
    TestbedOptions options_;
    std::filesystem::path workdir_;
    bool owns_workdir_ = false;
    std::map<std::string, Subprocess> children_;
    std::string catalog_url_;
    std::string master_url_;
    std::map<std::string, std::string> agent_urls_;
};

std::filesystem::path default_echo_binary();

}// namespace echo::cli
