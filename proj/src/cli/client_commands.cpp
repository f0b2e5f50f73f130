// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#include <echo/cli/commands.hpp>
#include <echo/common/error.hpp>
#include <echo/net/http.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace echo::cli {

using Json = nlohmann::json;

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v && *v ? std::string(v) : fallback;
}

namespace {

net::HttpClient client(const std::string& url) {
    return net::HttpClient(url, {std::chrono::milliseconds(3000), std::chrono::milliseconds(300000)});
}

/// Maps a failed result onto an exit code, printing the reason.
int report_failure(const net::HttpResult& r, const std::string& url) {
    if (!r.reached()) {
        std::cerr << "error: cannot reach master at " << url << ": " << r.error << "\n";
        return kExitUnreachable;
    }
    std::cerr << "error: " << r.status << " " << r.message() << "\n";
    return kExitApiError;
}

}// namespace

int cmd_submit(const std::string& master_url, const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        std::cerr << "error: cannot read " << file << "\n";
        return kExitApiError;
    }
    std::stringstream body;
    body << in.rdbuf();
    std::string text = body.str();
    // Workers run elsewhere, so relative file names in processor configs are
    // pinned to the submitter's working directory.
    auto doc = Json::parse(text, nullptr, false);
    if (doc.is_object() && doc.contains("processors") && doc["processors"].is_array()) {
        for (auto& proc : doc["processors"]) {
            if (!proc.is_object() || !proc.contains("config") || !proc["config"].is_object()) {
                continue;
            }
            for (const char* key : {"file", "path", "command"}) {
                auto& cfg = proc["config"];
                if (!cfg.contains(key) || !cfg[key].is_string()) {
                    continue;
                }
                const std::filesystem::path v = cfg[key].get<std::string>();
                const bool is_path = std::string_view(key) != "command" || v.string().find('/') != std::string::npos;
                if (is_path && v.is_relative() && !v.empty()) {
                    cfg[key] = std::filesystem::absolute(v).lexically_normal().string();
                }
            }
        }
        text = doc.dump();
    }
    const auto r = client(master_url).post("/dataflows", text);
    if (!r.ok()) {
        return report_failure(r, master_url);
    }
    std::cout << r.json().at("uuid").get<std::string>() << "\n";
    return kExitOk;
}

int cmd_status(const std::string& master_url, const std::string& uuid, bool json) {
    const auto r = client(master_url).get("/dataflows/" + net::url_encode(uuid));
    if (!r.ok()) {
        return report_failure(r, master_url);
    }
    const auto doc = r.json();
    if (json) {
        std::cout << doc.dump(2) << "\n";
        return kExitOk;
    }
    std::cout << doc.value("name", "") << "  " << uuid << "\n";
    std::cout << "state: " << doc.value("state", "") << "\n";
    for (const auto& w : doc.value("warnings", Json::array())) {
        std::cout << "warning: " << w.get<std::string>() << "\n";
    }
    std::cout << "processor            worker               in/s      out/s     in_total\n";
    const auto metrics = doc.value("metrics", Json::object());
    for (const auto& [pid, worker] : doc["mapping"].items()) {
        const auto m = metrics.value(pid, Json::object());
        char line[256];
        std::snprintf(line, sizeof line, "%-20s %-20s %-9.1f %-9.1f %llu\n", pid.c_str(), worker.get<std::string>().c_str(),
                      m.value("in_tuples_per_s", 0.0), m.value("out_tuples_per_s", 0.0),
                      static_cast<unsigned long long>(m.value("in_tuples", std::uint64_t{0})));
        std::cout << line;
    }
    return kExitOk;
}

int cmd_stop(const std::string& master_url, const std::string& uuid) {
    const auto r = client(master_url).del("/dataflows/" + net::url_encode(uuid));
    if (!r.ok()) {
        return report_failure(r, master_url);
    }
    const auto doc = r.json();
    std::cout << "stopped " << uuid << "\n";
    for (const auto& w : doc.value("unreachable", Json::array())) {
        std::cout << "warning: worker " << w.get<std::string>() << " was unreachable\n";
    }
    return kExitOk;
}

int cmd_rebalance(const std::string& master_url, const std::string& uuid) {
    const auto r = client(master_url).post("/dataflows/" + net::url_encode(uuid) + "/rebalance", "{}");
    if (!r.ok()) {
        return report_failure(r, master_url);
    }
    const auto doc = r.json();
    if (doc.value("noop", false)) {
        std::cout << "placement unchanged\n";
    } else {
        std::cout << "moved:";
        for (const auto& p : doc.value("moved", Json::array())) {
            std::cout << " " << p.get<std::string>();
        }
        std::cout << " (" << doc.value("migration_ms", 0) << " ms)\n";
    }
    for (const auto& [pid, worker] : doc["mapping"].items()) {
        std::cout << "  " << pid << " -> " << worker.get<std::string>() << "\n";
    }
    return kExitOk;
}

int cmd_list(const std::string& master_url) {
    const auto r = client(master_url).get("/dataflows");
    if (!r.ok()) {
        return report_failure(r, master_url);
    }
    for (const auto& d : r.json().value("dataflows", Json::array())) {
        std::cout << d.value("uuid", "") << "  " << d.value("state", "") << "  " << d.value("name", "") << "\n";
    }
    return kExitOk;
}

}// namespace echo::cli
