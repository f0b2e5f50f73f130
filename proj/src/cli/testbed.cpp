// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#include <echo/cli/testbed.hpp>
#include <echo/common/error.hpp>
#include <echo/common/ids.hpp>
#include <echo/net/http.hpp>

#include <spdlog/spdlog.h>

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <thread>

namespace echo::cli {

using Json = nlohmann::json;

std::filesystem::path default_echo_binary() {
    if (const char* env = std::getenv("ECHO_BIN")) {
        return env;
    }
    return std::filesystem::read_symlink("/proc/self/exe");
}

TestbedConfig TestbedConfig::from_json(const Json& doc) {
    TestbedConfig c;
    c.catalog_listen = doc.value("catalog_listen", c.catalog_listen);
    c.master_listen = doc.value("master_listen", c.master_listen);
    c.heartbeat = std::chrono::milliseconds(doc.value("heartbeat_ms", std::int64_t{5000}));
    c.metrics_interval = std::chrono::milliseconds(doc.value("metrics_interval_ms", std::int64_t{1000}));
    if (doc.contains("workdir")) {
        c.workdir = doc["workdir"].get<std::string>();
    }
    std::vector<std::string> problems;
    std::set<std::string> ids;
    std::set<std::string> listens;
    for (const auto& d : doc.value("devices", Json::array())) {
        DeviceConfig dev;
        dev.agent = d;
        dev.agent.erase("workers");
        if (dev.id().empty()) {
            problems.push_back("every testbed device needs an id");
        } else if (!ids.insert(dev.id()).second) {
            problems.push_back("duplicate device id " + dev.id());
        }
        const auto listen = d.value("listen", std::string("127.0.0.1:0"));
        if (!listen.ends_with(":0") && !listens.insert(listen).second) {
            problems.push_back("duplicate endpoint " + listen);
        }
        for (const auto& w : d.value("workers", Json::array())) {
            WorkerRequest req;
            req.cpu_millis = w.value("cpu_millis", req.cpu_millis);
            req.mem_mb = w.value("mem_mb", req.mem_mb);
            req.profile = w.value("profile", std::string());
            dev.workers.push_back(req);
        }
        c.devices.push_back(std::move(dev));
    }
    if (c.devices.empty()) {
        problems.push_back("testbed config lists no devices");
    }
    if (!problems.empty()) {
        throw ValidationError(problems);
    }
    return c;
}

TestbedConfig TestbedConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read testbed config " + path.string());
    }
    try {
        return from_json(Json::parse(in));
    } catch (const Json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

Testbed::Testbed(TestbedConfig config, TestbedOptions options) : config_(std::move(config)), options_(std::move(options)) {
    if (options_.echo_binary.empty()) {
        options_.echo_binary = default_echo_binary();
    }
    workdir_ = config_.workdir;
    if (workdir_.empty()) {
        workdir_ = std::filesystem::temp_directory_path() / ("echo-testbed-" + random_hex(8));
        owns_workdir_ = true;
    }
    std::filesystem::create_directories(workdir_);
}

Testbed::~Testbed() {
    try {
        down();
    } catch (const std::exception& e) {
        spdlog::warn("testbed teardown: {}", e.what());
    }
    if (owns_workdir_) {
        std::error_code ec;
        std::filesystem::remove_all(workdir_, ec);
    }
}

int Testbed::start_child(const std::string& name, std::vector<std::string> args, std::map<std::string, std::string> env,
                         const std::string& listen) {
    Subprocess::Options opts;
    opts.argv.push_back(options_.echo_binary.string());
    for (auto& a : args) {
        opts.argv.push_back(std::move(a));
    }
    opts.env = std::move(env);
    opts.env["ECHO_METRICS_INTERVAL_MS"] = std::to_string(config_.metrics_interval.count());
    opts.env["ECHO_BIN"] = options_.echo_binary.string();
    opts.capture_stdout = true;
    opts.stderr_file = workdir_ / (name + ".log");
    auto child = Subprocess::spawn(opts);
    int port = 0;
    try {
        port = await_listening(child, std::chrono::milliseconds(20000));
    } catch (const std::exception& e) {
        child.terminate(std::chrono::milliseconds(500));
        throw IoError(name + " failed to start on " + listen + " (" + e.what() + "); see " + opts.stderr_file.string());
    }
    children_.insert_or_assign(name, std::move(child));
    return port;
}

void Testbed::up() {
    const auto hb = std::to_string(config_.heartbeat.count());
    const int cat_port = start_child("catalog", {"cat", "--listen", config_.catalog_listen, "--heartbeat-ms", hb}, {}, config_.catalog_listen);
    catalog_url_ = "http://127.0.0.1:" + std::to_string(cat_port);
    start_master();
    for (const auto& dev : config_.devices) {
        auto cfg = dev.agent;
        cfg["catalog_url"] = catalog_url_;
        cfg["heartbeat_ms"] = config_.heartbeat.count();
        if (!cfg.contains("workdir")) {
            cfg["workdir"] = (workdir_ / ("agent-" + dev.id())).string();
        }
        const auto path = workdir_ / ("agent-" + dev.id() + ".json");
        std::ofstream(path) << cfg.dump(2);
        const auto listen = cfg.value("listen", std::string("127.0.0.1:0"));
        const int port = start_child("agent-" + dev.id(), {"agent", "-c", path.string()}, {}, listen);
        agent_urls_[dev.id()] = "http://127.0.0.1:" + std::to_string(port);
    }
    std::set<std::string> classes;
    for (const auto& dev : config_.devices) {
        classes.insert(dev.device_class());
    }
    for (const auto& cls : classes) {
        if (!options_.defer_classes.contains(cls)) {
            spawn_workers(cls);
        }
    }
}

void Testbed::start_master() {
    const int port = start_child("master", {"master", "--listen", config_.master_listen, "--catalog", catalog_url_}, options_.master_env,
                                 config_.master_listen);
    master_url_ = "http://127.0.0.1:" + std::to_string(port);
}

void Testbed::kill_master(int signal) {
    auto it = children_.find("master");
    if (it == children_.end()) {
        return;
    }
    it->second.signal(signal);
    it->second.wait_for(std::chrono::milliseconds(5000));
    children_.erase(it);
    master_url_.clear();
}

std::string Testbed::spawn_worker(const std::string& device, const WorkerRequest& request) {
    const auto url = agent_urls_.at(device);
    net::HttpClient client(url, {std::chrono::milliseconds(2000), std::chrono::milliseconds(30000)});
    Json body{{"caps", {{"cpu_millis", request.cpu_millis}, {"mem_mb", request.mem_mb}}}};
    if (!request.profile.empty()) {
        body["profile"] = request.profile;
    }
    const auto r = client.post_json("/workers", body);
    if (!r.ok()) {
        throw IoError("spawning a worker on " + device + " failed: " + r.message());
    }
    return r.json().at("worker_id").get<std::string>();
}

std::vector<std::string> Testbed::spawn_workers(const std::string& device_class) {
    std::vector<std::string> ids;
    for (const auto& dev : config_.devices) {
        if (dev.device_class() != device_class) {
            continue;
        }
        for (const auto& w : dev.workers) {
            ids.push_back(spawn_worker(dev.id(), w));
        }
    }
    return ids;
}

Json Testbed::agent_status(const std::string& device) const {
    const auto r = net::HttpClient(agent_urls_.at(device)).get("/status");
    if (!r.ok()) {
        throw UnreachableError("agent " + device + ": " + r.message());
    }
    return r.json();
}

std::map<std::string, int> Testbed::worker_pids() const {
    std::map<std::string, int> out;
    for (const auto& [dev, url] : agent_urls_) {
        for (const auto& w : agent_status(dev).value("workers", Json::array())) {
            if (w.value("state", "") == "up") {
                out[w.value("worker_id", "")] = w.value("pid", 0);
            }
        }
    }
    return out;
}

std::vector<int> Testbed::live_pids() {
    std::vector<int> out;
    for (auto& [name, child] : children_) {
        if (child.running()) {
            out.push_back(child.pid());
        }
    }
    return out;
}

Json Testbed::describe() const {
    return Json{{"catalog", catalog_url_}, {"master", master_url_}, {"agents", agent_urls_}, {"workdir", workdir_.string()}};
}

void Testbed::down() {
    // Agents first (they stop their workers), then master and catalog.
    for (auto it = children_.begin(); it != children_.end();) {
        if (it->first.starts_with("agent-")) {
            it->second.terminate(std::chrono::milliseconds(10000));
            it = children_.erase(it);
        } else {
            ++it;
        }
    }
    for (const auto* name : {"master", "catalog"}) {
        if (auto it = children_.find(name); it != children_.end()) {
            it->second.terminate(std::chrono::milliseconds(3000));
            children_.erase(it);
        }
    }
    agent_urls_.clear();
}

}// namespace echo::cli
