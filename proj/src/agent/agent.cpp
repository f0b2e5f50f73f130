// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#include <echo/agent/agent.hpp>
#include <echo/common/error.hpp>
#include <echo/common/ids.hpp>
#include <echo/common/shutdown.hpp>
#include <echo/common/throttle.hpp>
#include <echo/common/time.hpp>
#include <echo/net/http.hpp>

#include <spdlog/spdlog.h>

#include <csignal>
#include <cstdlib>
#include <sstream>

namespace echo::agent {

using catalog::CatalogItem;
using Json = nlohmann::json;
namespace rel = catalog::rel;

namespace {

std::string join(const auto& items) {
    std::string out;
    for (const auto& s : items) {
        if (!out.empty()) {
            out += ',';
        }
        out += s;
    }
    return out;
}

std::string fmt_pct(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

}// namespace

DeviceInfo DeviceInfo::from_json(const Json& doc) {
    DeviceInfo d;
    d.id = doc.value("id", std::string());
    if (d.id.empty()) {
        d.id = random_hex(12);
    }
    d.device_class = doc.value("class", d.device_class);
    if (doc.contains("capacity")) {
        d.capacity.cpu_millis = doc["capacity"].value("cpu_millis", d.capacity.cpu_millis);
        d.capacity.mem_mb = doc["capacity"].value("mem_mb", d.capacity.mem_mb);
    }
    d.tags = doc.value("tags", d.tags);
    d.visibility = doc.value("visibility", d.visibility);
    if (doc.contains("reachable_from")) {
        d.reachable_from = doc["reachable_from"].get<std::set<std::string>>();
    }
    d.profile = doc.value("profile", d.device_class == "cloud" ? std::string("unthrottled") : d.profile);
    d.endpoint = doc.value("endpoint", std::string());
    d.validate();
    return d;
}

void DeviceInfo::validate() const {
    std::vector<std::string> problems;
    if (id.empty() || id.find_first_of("/ \t\n") != std::string::npos) {
        problems.push_back("device id '" + id + "' is empty or has '/' or whitespace");
    }
    if (device_class != "edge" && device_class != "fog" && device_class != "cloud") {
        problems.push_back("class must be edge, fog or cloud");
    }
    if (capacity.cpu_millis <= 0 || capacity.mem_mb <= 0) {
        problems.push_back("capacity must be positive");
    }
    if (visibility != "public" && visibility != "private") {
        problems.push_back("visibility must be public or private");
    }
    try {
        ThrottleProfile::named(profile);
    } catch (const ValidationError& e) {
        problems.push_back(e.what());
    }
    if (!problems.empty()) {
        throw ValidationError(problems);
    }
}

Json DeviceInfo::to_json() const {
    return Json{{"id", id},
                {"class", device_class},
                {"capacity", {{"cpu_millis", capacity.cpu_millis}, {"mem_mb", capacity.mem_mb}}},
                {"tags", tags},
                {"visibility", visibility},
                {"reachable_from", reachable_from},
                {"profile", profile},
                {"endpoint", endpoint}};
}

CatalogItem DeviceInfo::to_item() const {
    CatalogItem item{"/device/" + id, {}};
    item.set(rel::kClass, device_class);
    item.set(rel::kCpuMillis, std::to_string(capacity.cpu_millis));
    item.set(rel::kMemMb, std::to_string(capacity.mem_mb));
    item.set(rel::kTags, join(tags));
    item.set(rel::kVisibility, visibility);
    item.set(rel::kReachableFrom, join(reachable_from));
    item.set(rel::kProfile, profile);
    item.set(rel::kEndpoint, endpoint);
    item.set(rel::kState, "up");
    return item;
}

AgentConfig AgentConfig::from_json(const Json& doc) {
    AgentConfig c;
    c.device = DeviceInfo::from_json(doc);
    c.catalog_url = doc.value("catalog_url", std::string());
    c.listen = doc.value("listen", c.listen);
    c.heartbeat = std::chrono::milliseconds(doc.value("heartbeat_ms", std::int64_t{5000}));
    if (doc.contains("engine_binary")) {
        c.engine_binary = doc["engine_binary"].get<std::string>();
    }
    if (doc.contains("workdir")) {
        c.workdir = doc["workdir"].get<std::string>();
    }
    return c;
}

std::string to_string(WorkerState s) {
    switch (s) {
        case WorkerState::starting: return "starting";
        case WorkerState::up: return "up";
        case WorkerState::down: return "down";
    }
    return "down";
}

Json WorkerSandbox::to_json() const {
    return Json{{"worker_id", id},
                {"device", device},
                {"caps", {{"cpu_millis", caps.cpu_millis}, {"mem_mb", caps.mem_mb}}},
                {"profile", profile},
                {"endpoint", endpoint},
                {"state", to_string(state)},
                {"started_at", started_at},
                {"stopped_at", stopped_at},
                {"pid", pid}};
}

CatalogItem WorkerSandbox::to_item() const {
    CatalogItem item{"/worker/" + id, {}};
    item.set(rel::kParent, device);
    item.set(rel::kCpuMillis, std::to_string(caps.cpu_millis));
    item.set(rel::kMemMb, std::to_string(caps.mem_mb));
    item.set(rel::kProfile, profile);
    item.set(rel::kEndpoint, endpoint);
    item.set(rel::kState, to_string(state));
    item.set(rel::kStartedAt, started_at);
    if (!stopped_at.empty()) {
        item.set(rel::kStoppedAt, stopped_at);
    }
    if (state == WorkerState::down) {
        item.set(rel::kStale, "true");
    }
    return item;
}

Agent::Agent(AgentConfig config) : config_(std::move(config)), catalog_(config_.catalog_url) {
    if (config_.catalog_url.empty()) {
        throw ValidationError("agent needs a catalog url");
    }
    if (config_.engine_binary.empty()) {
        if (const char* env = std::getenv("ECHO_BIN")) {
            config_.engine_binary = env;
        } else {
            config_.engine_binary = std::filesystem::read_symlink("/proc/self/exe");
        }
    }
    if (config_.workdir.empty()) {
        config_.workdir = std::filesystem::temp_directory_path() / ("echo-agent-" + config_.device.id);
    }
    std::filesystem::create_directories(config_.workdir);
}

Agent::~Agent() { shutdown(); }

void Agent::bootstrap(const std::string& endpoint, std::chrono::milliseconds give_up) {
    config_.device.endpoint = endpoint;
    const auto deadline = SteadyClock::now() + give_up;
    bool warned = false;
    while (!catalog_.healthy()) {
        if (give_up.count() > 0 && SteadyClock::now() >= deadline) {
            throw UnreachableError("catalog " + config_.catalog_url + " unreachable");
        }
        if (!warned) {
            spdlog::warn("agent {}: catalog {} not reachable yet, retrying", config_.device.id, config_.catalog_url);
            warned = true;
        }
        if (Shutdown::wait_for(std::chrono::milliseconds(500))) {
            throw UnreachableError("interrupted while waiting for the catalog");
        }
    }
    const auto href = "/device/" + config_.device.id;
    if (const auto existing = catalog_.get(href)) {
        const bool live = existing->value_or(rel::kState, "up") == "up" && existing->value_or(rel::kStale, "false") != "true";
        if (live) {
            throw Conflict("device " + config_.device.id + " is already registered and live");
        }
    }
    catalog_.put(config_.device.to_item());
    spdlog::info("agent {}: registered ({}, {} mc, {} MB)", config_.device.id, config_.device.device_class,
                 config_.device.capacity.cpu_millis, config_.device.capacity.mem_mb);
    std::lock_guard lock(loop_mu_);
    stopping_ = false;
    monitor_ = std::thread([this] { monitor_loop(); });
}

Capacity Agent::allotted() const {
    std::lock_guard lock(mu_);
    Capacity used;
    for (const auto& [id, w] : workers_) {
        if (w->info.state != WorkerState::down) {
            used.cpu_millis += w->info.caps.cpu_millis;
            used.mem_mb += w->info.caps.mem_mb;
        }
    }
    return used;
}

WorkerSandbox Agent::spawn_worker(Capacity caps, const std::string& profile_name) {
    std::lock_guard serial(spawn_mu_);
    if (caps.cpu_millis <= 0 || caps.mem_mb <= 0) {
        throw ValidationError("worker caps must be positive");
    }
    const auto profile = profile_name.empty() ? config_.device.profile : profile_name;
    ThrottleProfile::named(profile);
    const auto used = allotted();
    const Capacity free{config_.device.capacity.cpu_millis - used.cpu_millis, config_.device.capacity.mem_mb - used.mem_mb};
    if (caps.cpu_millis > free.cpu_millis || caps.mem_mb > free.mem_mb) {
        throw CapacityError("insufficient capacity on " + config_.device.id + ": requested " + std::to_string(caps.cpu_millis) + "m/" +
                            std::to_string(caps.mem_mb) + "MB, remaining " + std::to_string(free.cpu_millis) + "m/" +
                            std::to_string(free.mem_mb) + "MB");
    }

    auto w = std::make_unique<Worker>();
    {
        std::lock_guard lock(mu_);
        w->info.id = config_.device.id + "-w" + std::to_string(next_worker_++);
    }
    w->info.device = config_.device.id;
    w->info.caps = caps;
    w->info.profile = profile;

    const auto dir = config_.workdir / w->info.id;
    std::filesystem::create_directories(dir);
    Subprocess::Options opts;
    opts.argv = {config_.engine_binary.string(),
                 "engine",
                 "--listen",
                 "127.0.0.1:0",
                 "--worker-id",
                 w->info.id,
                 "--device",
                 config_.device.id,
                 "--catalog",
                 config_.catalog_url,
                 "--cpu-millis",
                 std::to_string(caps.cpu_millis),
                 "--mem-mb",
                 std::to_string(caps.mem_mb),
                 "--profile",
                 profile,
                 "--reachable-from",
                 join(config_.device.reachable_from),
                 "--workdir",
                 dir.string()};
    opts.capture_stdout = true;
    opts.stderr_file = dir / "engine.log";
    w->process = Subprocess::spawn(opts);

    int port = 0;
    try {
        port = await_listening(w->process, config_.worker_health_timeout);
        w->info.endpoint = "http://127.0.0.1:" + std::to_string(port);
        net::HttpClient probe(w->info.endpoint, {std::chrono::milliseconds(500), std::chrono::milliseconds(1000)});
        const auto deadline = SteadyClock::now() + config_.worker_health_timeout;
        while (!probe.get("/health").ok()) {
            if (SteadyClock::now() >= deadline || !w->process.running()) {
                throw UnreachableError("worker " + w->info.id + " failed its health check");
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(100));
        }
    } catch (const std::exception& e) {
        w->process.terminate(std::chrono::milliseconds(500));
        throw UnreachableError(std::string("worker did not come up: ") + e.what());
    }
    w->info.state = WorkerState::up;
    w->info.pid = w->process.pid();
    w->info.started_at = now_iso8601();
    const auto info = w->info;
    {
        std::lock_guard lock(mu_);
        workers_[info.id] = std::move(w);
    }
    publish(info.to_item());
    spdlog::info("agent {}: worker {} up at {} ({}m, {})", config_.device.id, info.id, info.endpoint, caps.cpu_millis, profile);
    return info;
}

void Agent::terminate_worker(const std::string& id) {
    std::lock_guard serial(spawn_mu_);
    std::unique_ptr<Worker> w;
    {
        std::lock_guard lock(mu_);
        auto it = workers_.find(id);
        if (it == workers_.end()) {
            throw NotFound("no worker " + id + " on " + config_.device.id);
        }
        w = std::move(it->second);
        workers_.erase(it);
    }
    if (w->info.state != WorkerState::down) {
        net::HttpClient(w->info.endpoint, {std::chrono::milliseconds(500), std::chrono::milliseconds(3000)}).post("/shutdown", "{}");
    }
    w->process.terminate(std::chrono::milliseconds(3000));
    w->info.state = WorkerState::down;
    w->info.stopped_at = now_iso8601();
    try {
        catalog_.remove("/worker/" + id);
        catalog_.remove("/worker/" + id + "/metrics");
        catalog_.remove("/worker/" + id + "/CPUUtil");
        catalog_.remove("/worker/" + id + "/MemUtil");
        CatalogItem bill{"/device/" + config_.device.id + "/workers/" + id, {}};
        bill.set(rel::kStartedAt, w->info.started_at);
        bill.set(rel::kStoppedAt, w->info.stopped_at);
        bill.set(rel::kCpuMillis, std::to_string(w->info.caps.cpu_millis));
        bill.set(rel::kMemMb, std::to_string(w->info.caps.mem_mb));
        catalog_.put(bill);
    } catch (const std::exception& e) {
        spdlog::warn("agent {}: catalog cleanup for {} failed: {}", config_.device.id, id, e.what());
    }
    spdlog::info("agent {}: worker {} terminated", config_.device.id, id);
}

Json Agent::status() const {
    Json workers = Json::array();
    std::lock_guard lock(mu_);
    Capacity used;
    for (const auto& [id, w] : workers_) {
        workers.push_back(w->info.to_json());
        if (w->info.state != WorkerState::down) {
            used.cpu_millis += w->info.caps.cpu_millis;
            used.mem_mb += w->info.caps.mem_mb;
        }
    }
    return Json{{"device", config_.device.to_json()},
                {"allotted", {{"cpu_millis", used.cpu_millis}, {"mem_mb", used.mem_mb}}},
                {"workers", workers}};
}

void Agent::publish(const CatalogItem& item) const {
    try {
        catalog_.put(item);
    } catch (const std::exception& e) {
        spdlog::debug("agent {}: catalog write {} failed: {}", config_.device.id, item.href, e.what());
    }
}

void Agent::mark_down(Worker& w) {
    w.info.state = WorkerState::down;
    w.info.stopped_at = now_iso8601();
    spdlog::warn("agent {}: worker {} is down", config_.device.id, w.info.id);
}

void Agent::monitor_once() {
    const auto now = SteadyClock::now();
    std::vector<CatalogItem> writes;
    double device_pct = 0;
    std::uint64_t rss = 0;
    {
        std::lock_guard lock(mu_);
        for (auto& [id, w] : workers_) {
            if (w->info.state == WorkerState::down) {
                continue;
            }
            const auto sample = w->process.running() ? sample_process(w->process.pid()) : std::nullopt;
            if (!sample) {
                mark_down(*w);
                writes.push_back(w->info.to_item());
                continue;
            }
            const double pct = w->meter.update(sample->cpu_seconds, now, config_.device.capacity.cpu_millis);
            device_pct += pct;
            rss += sample->rss_bytes;
            const double worker_pct = pct * static_cast<double>(config_.device.capacity.cpu_millis) /
                                      static_cast<double>(std::max<std::int64_t>(w->info.caps.cpu_millis, 1));
            const double mem_mb = static_cast<double>(sample->rss_bytes) / (1024.0 * 1024.0);
            writes.push_back(w->info.to_item());
            CatalogItem cpu{"/worker/" + id + "/CPUUtil", {}};
            cpu.set(rel::kValue, fmt_pct(worker_pct));
            writes.push_back(cpu);
            CatalogItem mem{"/worker/" + id + "/MemUtil", {}};
            mem.set(rel::kValue, fmt_pct(100.0 * mem_mb / static_cast<double>(w->info.caps.mem_mb)));
            writes.push_back(mem);
        }
    }
    writes.push_back(config_.device.to_item());
    CatalogItem cpu{"/device/" + config_.device.id + "/CPUUtil", {}};
    cpu.set(rel::kValue, fmt_pct(device_pct));
    writes.push_back(cpu);
    CatalogItem mem{"/device/" + config_.device.id + "/MemUtil", {}};
    mem.set(rel::kValue,
            fmt_pct(100.0 * static_cast<double>(rss) / (1024.0 * 1024.0) / static_cast<double>(config_.device.capacity.mem_mb)));
    writes.push_back(mem);
    for (const auto& item : writes) {
        publish(item);
    }
}

void Agent::monitor_loop() {
    // Dead workers are checked more often than the heartbeat so they are
    // reported well inside the staleness window.
    const auto check = std::max(std::chrono::milliseconds(100), config_.heartbeat / 5);
    auto next_beat = SteadyClock::now();
    while (true) {
        {
            std::unique_lock lock(loop_mu_);
            if (loop_cv_.wait_for(lock, check, [this] { return stopping_; })) {
                return;
            }
        }
        bool died = false;
        {
            std::lock_guard lock(mu_);
            for (auto& [id, w] : workers_) {
                died |= w->info.state != WorkerState::down && !w->process.running();
            }
        }
        if (died || SteadyClock::now() >= next_beat) {
            monitor_once();
            next_beat = SteadyClock::now() + config_.heartbeat;
        }
    }
}

void Agent::shutdown() {
    {
        std::lock_guard lock(loop_mu_);
        stopping_ = true;
    }
    loop_cv_.notify_all();
    if (monitor_.joinable()) {
        monitor_.join();
    }
    std::vector<std::string> ids;
    {
        std::lock_guard lock(mu_);
        for (const auto& [id, w] : workers_) {
            ids.push_back(id);
        }
    }
    for (const auto& id : ids) {
        try {
            terminate_worker(id);
        } catch (const std::exception& e) {
            spdlog::warn("agent {}: {}", config_.device.id, e.what());
        }
    }
    if (!config_.device.endpoint.empty()) {
        auto item = config_.device.to_item();
        item.set(rel::kState, "down");
        publish(item);
        config_.device.endpoint.clear();
    }
}

}// namespace echo::agent
