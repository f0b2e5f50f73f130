// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#include <echo/common/error.hpp>
#include <echo/common/shutdown.hpp>
#include <echo/common/subprocess.hpp>
#include <echo/common/time.hpp>
#include <echo/master/master.hpp>
#include <echo/net/http.hpp>

#include <spdlog/spdlog.h>

#include <thread>

namespace echo::master {

using net::Json;
using net::Request;
using net::Response;

int run_master(MasterOptions options, const std::string& listen) {
    Shutdown::install();
    Master master(std::move(options));
    net::HttpServer http(16);
    http.post("/dataflows", [&](const Request& req, Response& res) { res.json(201, Json{{"uuid", master.start(req.body)}}); });
    http.get("/dataflows", [&](const Request&, Response& res) { res.json(200, Json{{"dataflows", master.list()}}); });
    http.get(R"(/dataflows/([^/]+))", [&](const Request& req, Response& res) { res.json(200, master.describe(req.captures[0])); });
    http.del(R"(/dataflows/([^/]+))", [&](const Request& req, Response& res) { res.json(200, master.stop(req.captures[0])); });
    http.post(R"(/dataflows/([^/]+)/rebalance)",
              [&](const Request& req, Response& res) { res.json(200, master.rebalance(req.captures[0])); });
    http.get("/health", [](const Request&, Response& res) { res.json(200, Json{{"ok", true}}); });

    const int port = http.bind(listen);
    http.start();

    catalog::CatalogItem self{"/service/master", {}};
    self.set(catalog::rel::kEndpoint, http.url());
    self.set(catalog::rel::kStartedAt, now_iso8601());
    self.set(catalog::rel::kState, "up");
    for (int attempt = 0;; ++attempt) {
        try {
            master.catalog().put(self);
            break;
        } catch (const std::exception& e) {
            if (attempt == 0) {
                spdlog::warn("master: catalog not reachable yet ({}), retrying", e.what());
            }
            if (Shutdown::wait_for(std::chrono::milliseconds(500))) {
                http.stop();
                return 1;
            }
        }
    }
    spdlog::info("master listening on {}", http.url());
    announce_listening(port);
    Shutdown::wait();
    http.stop();
    return 0;
}

}// namespace echo::master
