// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <echo/engine/edge_queue.hpp>
#include <echo/engine/links.hpp>
#include <echo/net/http.hpp>

#include <map>
#include <memory>
#include <mutex>
#include <string>

namespace echo::wrappers {

/// A minimal remote engine for the bridge wrapper. Batches pushed to any link
/// are transformed and queued for the link named by the X-Echo-Reply-To header
/// (default "<link>.out"). Mode "echo" returns them unchanged, "double"
/// doubles every tuple value.
class StubEngine {
  public:
    enum class Mode { echo, twice };

    explicit StubEngine(Mode mode);

    int start(const std::string& listen);
    void stop();
    std::string url() const { return http_.url(); }

    static Mode parse_mode(const std::string& text);

  private:
    std::shared_ptr<engine::EdgeQueue> queue(const std::string& id);
    data::DataBatch transform(const data::DataBatch& in) const;

    Mode mode_;
    net::HttpServer http_;
    std::mutex mu_;
    std::map<std::string, std::shared_ptr<engine::EdgeQueue>> queues_;
    engine::DedupWindow seen_;
};

int run_stub_engine(const std::string& listen, const std::string& mode);

}// namespace echo::wrappers
