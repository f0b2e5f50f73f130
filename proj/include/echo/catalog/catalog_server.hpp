// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <echo/catalog/catalog.hpp>
#include <echo/net/http.hpp>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <mutex>
#include <thread>

namespace echo::catalog {

struct CatalogServerOptions {
    std::string listen = "127.0.0.1:0";
    std::filesystem::path snapshot;///< empty disables persistence
    std::chrono::milliseconds snapshot_interval{2000};
    std::chrono::milliseconds heartbeat{5000};///< items older than 3x are flagged stale
    std::chrono::milliseconds watch_timeout{30000};
};

/// REST front of a Catalog plus its background sweeper and snapshot writer.
class CatalogServer {
  public:
    explicit CatalogServer(CatalogServerOptions options);
    ~CatalogServer();

    /// Loads the snapshot (if any), binds and starts serving. Returns the port.
    int start();
    void stop();

    std::string url() const { return http_.url(); }
    Catalog& catalog() noexcept { return catalog_; }

    /// Writes the snapshot now (no-op without a snapshot path).
    void save_snapshot() const;

  private:
    void routes();
    void background();

    CatalogServerOptions options_;
    Catalog catalog_;
    net::HttpServer http_;
    std::thread worker_;
    std::mutex mu_;
    std::condition_variable cv_;
    bool stopping_ = false;
};

}// namespace echo::catalog
