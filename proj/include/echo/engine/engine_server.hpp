// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <echo/engine/engine.hpp>
#include <echo/net/http.hpp>

#include <string>

namespace echo::engine {

/// REST front of an Engine: control API plus the link wire protocol. Data
/// routes under /links/ pass the firewall shim; the control plane does not.
class EngineServer {
  public:
    explicit EngineServer(Engine& engine);

    int start(const std::string& listen);
    void stop();
    std::string url() const { return http_.url(); }

  private:
    Engine& engine_;
    net::HttpServer http_;
};

/// Runs an engine process until SIGTERM or POST /shutdown: binds, announces
/// "LISTENING <port>", reports metrics.
int run_engine(EngineOptions options, const std::string& listen, const ProcessorRegistry& registry);

}// namespace echo::engine
