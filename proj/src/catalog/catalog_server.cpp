// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#include <echo/catalog/catalog_json.hpp>
#include <echo/catalog/catalog_server.hpp>
#include <echo/common/error.hpp>

#include <spdlog/spdlog.h>

#include <fstream>

namespace echo::catalog {

using net::Json;
using net::Request;
using net::Response;

CatalogServer::CatalogServer(CatalogServerOptions options) : options_(std::move(options)) { routes(); }

CatalogServer::~CatalogServer() { stop(); }

void CatalogServer::routes() {
    http_.post("/cat", [this](const Request& req, Response& res) {
        auto item = item_from_text(req.body);
        if (req.param("if_absent") == "1") {
            if (!catalog_.register_if_absent(std::move(item))) {
                res.error(412, "an item is already registered at that href");
                return;
            }
            res.json(201, Json{{"created", true}});
            return;
        }
        const auto result = catalog_.register_item(std::move(item));
        res.json(result == Catalog::WriteResult::created ? 201 : 200, Json{{"created", result == Catalog::WriteResult::created}});
    });

    http_.get("/cat", [this](const Request&, Response& res) { res.json(200, catalogue_document(catalog_.query_prefix(""))); });

    http_.get("/cat/items", [this](const Request& req, Response& res) {
        if (req.has_param("href")) {
            auto item = catalog_.get_item(req.param("href"));
            if (!item) {
                throw NotFound("no item at " + req.param("href"));
            }
            res.json(200, to_json(*item));
            return;
        }
        res.json(200, Json{{"items", items_to_json(catalog_.query_prefix(req.param("prefix")))}});
    });

    http_.del("/cat/items", [this](const Request& req, Response& res) {
        if (!catalog_.delete_item(req.param("href"))) {
            throw NotFound("no item at " + req.param("href"));
        }
        res.status = 204;
    });

    http_.get("/cat/watch", [this](const Request& req, Response& res) {
        SysClock::time_point since{};
        if (req.has_param("since")) {
            auto tp = parse_iso8601(req.param("since"));
            if (!tp) {
                throw ValidationError("since must be an ISO-8601 UTC timestamp");
            }
            since = *tp;
        }
        auto timeout = options_.watch_timeout;
        if (req.has_param("timeout_ms")) {
            timeout = std::chrono::milliseconds(std::stoll(req.param("timeout_ms")));
        }
        res.json(200, Json{{"items", items_to_json(catalog_.watch_prefix(req.param("prefix"), since, timeout))}});
    });

    http_.get("/health", [this](const Request&, Response& res) { res.json(200, Json{{"ok", true}, {"items", catalog_.size()}}); });
}

void CatalogServer::save_snapshot() const {
    if (options_.snapshot.empty()) {
        return;
    }
    const auto doc = catalogue_document(catalog_.query_prefix(""));
    auto tmp = options_.snapshot;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) {
            throw IoError("cannot write snapshot " + tmp.string());
        }
        out << doc.dump();
    }
    std::filesystem::rename(tmp, options_.snapshot);
}

int CatalogServer::start() {
    if (!options_.snapshot.empty() && std::filesystem::exists(options_.snapshot)) {
        std::ifstream in(options_.snapshot);
        try {
            catalog_.load(items_from_json(Json::parse(in)));
            spdlog::info("catalog: loaded {} items from {}", catalog_.size(), options_.snapshot.string());
        } catch (const std::exception& e) {
            spdlog::warn("catalog: ignoring unreadable snapshot {}: {}", options_.snapshot.string(), e.what());
        }
    }
    const int port = http_.bind(options_.listen);
    http_.start();
    worker_ = std::thread([this] { background(); });
    return port;
}

void CatalogServer::stop() {
    {
        std::lock_guard lock(mu_);
        if (stopping_) {
            return;
        }
        stopping_ = true;
    }
    cv_.notify_all();
    http_.stop();
    if (worker_.joinable()) {
        worker_.join();
    }
    try {
        save_snapshot();
    } catch (const std::exception& e) {
        spdlog::warn("catalog: final snapshot failed: {}", e.what());
    }
}

void CatalogServer::background() {
    const auto sweep_every = std::clamp(options_.heartbeat / 5, std::chrono::milliseconds(100), std::chrono::milliseconds(1000));
    auto next_snapshot = SteadyClock::now() + options_.snapshot_interval;
    std::unique_lock lock(mu_);
    while (!cv_.wait_for(lock, sweep_every, [this] { return stopping_; })) {
        lock.unlock();
        if (auto n = catalog_.sweep_stale(SysClock::now(), options_.heartbeat * 3); n > 0) {
            spdlog::info("catalog: flagged {} stale items", n);
        }
        if (SteadyClock::now() >= next_snapshot) {
            try {
                save_snapshot();
            } catch (const std::exception& e) {
                spdlog::warn("catalog: snapshot failed: {}", e.what());
            }
            next_snapshot = SteadyClock::now() + options_.snapshot_interval;
        }
        lock.lock();
    }
}

}// namespace echo::catalog
