// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#include <echo/common/error.hpp>
#include <echo/common/shutdown.hpp>
#include <echo/common/subprocess.hpp>
#include <echo/databatch/tuple.hpp>
#include <echo/engine/wire.hpp>
#include <echo/wrappers/bridge.hpp>
#include <echo/wrappers/stub_engine.hpp>

#include <spdlog/spdlog.h>

namespace echo::wrappers {

using data::DataBatch;
using net::Json;
using net::Request;
using net::Response;

StubEngine::Mode StubEngine::parse_mode(const std::string& text) {
    if (text == "echo") {
        return Mode::echo;
    }
    if (text == "double") {
        return Mode::twice;
    }
    throw ValidationError("stub engine mode must be echo or double");
}

StubEngine::StubEngine(Mode mode) : mode_(mode) {
    http_.post(R"(/links/([^/]+)/batches)", [this](const Request& req, Response& res) {
        const auto batch = engine::from_envelope(Json::parse(req.body));
        if (!seen_.insert(batch.id())) {
            res.json(200, Json{{"accepted", true}, {"duplicate", true}});
            return;
        }
        auto reply_to = req.header(kReplyToHeader);
        if (reply_to.empty()) {
            reply_to = req.captures[0] + ".out";
        }
        if (!queue(reply_to)->try_push_for(transform(batch), std::chrono::milliseconds(500))) {
            seen_.erase(batch.id());
            res.error(503, "stub queue full");
            return;
        }
        res.json(200, Json{{"accepted", true}});
    });
    http_.get(R"(/links/([^/]+)/batches)", [this](const Request& req, Response& res) {
        const auto max = static_cast<std::size_t>(std::stoul(req.param("max", "64")));
        const auto wait = std::chrono::milliseconds(std::min<long>(std::stol(req.param("wait_ms", "0")), 5000));
        res.json(200, Json{{"batches", engine::to_envelopes(queue(req.captures[0])->peek(max, wait))}});
    });
    http_.post(R"(/links/([^/]+)/ack)", [this](const Request& req, Response& res) {
        const auto ids = Json::parse(req.body).value("batch_ids", Json::array()).get<std::set<std::string>>();
        res.json(200, Json{{"removed", queue(req.captures[0])->remove_ids(ids)}});
    });
    http_.get("/health", [this](const Request&, Response& res) {
        res.json(200, Json{{"ok", true}, {"mode", mode_ == Mode::echo ? "echo" : "double"}});
    });
}

std::shared_ptr<engine::EdgeQueue> StubEngine::queue(const std::string& id) {
    std::lock_guard lock(mu_);
    auto& q = queues_[id];
    if (!q) {
        q = std::make_shared<engine::EdgeQueue>(4096);
    }
    return q;
}

DataBatch StubEngine::transform(const DataBatch& in) const {
    if (mode_ == Mode::echo || in.opaque()) {
        return in.restamped();
    }
    std::string content;
    for (auto t : data::batch_to_stream(in)) {
        t.value *= 2;
        data::encode_tuple(t, content);
        content.push_back('\n');
    }
    data::Attributes attrs;
    for (const auto& [k, v] : in.attributes()) {
        if (k.rfind("batch.", 0) != 0) {
            attrs.emplace(k, v);
        }
    }
    return DataBatch::make(std::move(content), in.count(), std::move(attrs));
}

int StubEngine::start(const std::string& listen) {
    const int port = http_.bind(listen);
    http_.start();
    return port;
}

void StubEngine::stop() { http_.stop(); }

int run_stub_engine(const std::string& listen, const std::string& mode) {
    Shutdown::install();
    StubEngine stub(StubEngine::parse_mode(mode));
    const int port = stub.start(listen);
    spdlog::info("stub engine ({}) listening on {}", mode, stub.url());
    announce_listening(port);
    Shutdown::wait();
    stub.stop();
    return 0;
}

}// namespace echo::wrappers
