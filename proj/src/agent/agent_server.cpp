// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#include <echo/agent/agent.hpp>
#include <echo/common/error.hpp>
#include <echo/common/shutdown.hpp>
#include <echo/net/http.hpp>

#include <spdlog/spdlog.h>

namespace echo::agent {

using net::Json;
using net::Request;
using net::Response;

int run_agent(AgentConfig config) {
    Shutdown::install();
    Agent agent(std::move(config));
    net::HttpServer http(8);
    http.post("/workers", [&](const Request& req, Response& res) {
        const auto body = req.body.empty() ? Json::object() : Json::parse(req.body);
        Capacity caps;
        const auto c = body.value("caps", Json::object());
        caps.cpu_millis = c.value("cpu_millis", std::int64_t{0});
        caps.mem_mb = c.value("mem_mb", std::int64_t{0});
        const auto w = agent.spawn_worker(caps, body.value("profile", std::string()));
        res.json(201, Json{{"worker_id", w.id}, {"endpoint", w.endpoint}});
    });
    http.del(R"(/workers/([^/]+))", [&](const Request& req, Response& res) {
        agent.terminate_worker(req.captures[0]);
        res.json(200, Json{{"terminated", req.captures[0]}});
    });
    http.get("/status", [&](const Request&, Response& res) { res.json(200, agent.status()); });
    http.get("/health", [&](const Request&, Response& res) { res.json(200, Json{{"ok", true}, {"device", agent.device().id}}); });

    const int port = http.bind(agent.config().listen);
    http.start();
    try {
        agent.bootstrap(http.url());
    } catch (const std::exception& e) {
        spdlog::error("agent {}: {}", agent.device().id, e.what());
        http.stop();
        return 1;
    }
    announce_listening(port);
    Shutdown::wait();
    spdlog::info("agent {}: shutting down", agent.device().id);
    agent.shutdown();
    http.stop();
    return 0;
}

}// namespace echo::agent
