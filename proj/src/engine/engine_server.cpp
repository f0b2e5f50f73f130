// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#include <echo/common/error.hpp>
#include <echo/common/shutdown.hpp>
#include <echo/common/subprocess.hpp>
#include <echo/engine/engine_server.hpp>
#include <echo/engine/wire.hpp>

#include <spdlog/spdlog.h>

namespace echo::engine {

using net::Json;
using net::Request;
using net::Response;

namespace {

std::string decode_capture(const std::string& s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '%' && i + 2 < s.size()) {
            out.push_back(static_cast<char>(std::stoi(s.substr(i + 1, 2), nullptr, 16)));
            i += 2;
        } else {
            out.push_back(s[i]);
        }
    }
    return out;
}

Json parse_body(const Request& req) {
    try {
        return req.body.empty() ? Json::object() : Json::parse(req.body);
    } catch (const Json::parse_error& e) {
        throw ParseError(std::string("request body is not JSON: ") + e.what());
    }
}

}// namespace

EngineServer::EngineServer(Engine& engine) : engine_(engine), http_(48) {
    http_.set_gate([this](const Request& req) {
        if (req.path.rfind("/links/", 0) != 0) {
            return true;
        }
        return engine_.admits(req.header(kDeviceHeader));
    });

    http_.get("/health", [this](const Request&, Response& res) {
        const auto& o = engine_.options();
        res.json(200, Json{{"ok", true}, {"worker", o.worker_id}, {"device", o.device}, {"profile", o.profile}});
    });

    http_.get("/fragments", [this](const Request&, Response& res) { res.json(200, Json{{"fragments", engine_.list()}}); });

    http_.post("/fragments", [this](const Request& req, Response& res) {
        auto doc = parse_body(req);
        const bool start = doc.value("start", false);
        const auto desc = flow::descriptor_from_json(doc);
        engine_.deploy(desc);
        if (start) {
            engine_.start(desc.dataflow);
        }
        res.json(201, Json{{"fragment", desc.dataflow}, {"state", start ? "running" : "deployed"}});
    });

    http_.post(R"(/fragments/([^/]+)/start)", [this](const Request& req, Response& res) {
        engine_.start(decode_capture(req.captures[0]));
        res.json(200, Json{{"state", "running"}});
    });

    http_.post(R"(/fragments/([^/]+)/undeploy)", [this](const Request& req, Response& res) {
        res.json(200, engine_.undeploy(decode_capture(req.captures[0])));
    });

    http_.post(R"(/fragments/([^/]+)/rewire)", [this](const Request& req, Response& res) {
        auto desc = flow::descriptor_from_json(parse_body(req));
        const auto fid = decode_capture(req.captures[0]);
        if (desc.dataflow != fid) {
            throw ValidationError("descriptor dataflow " + desc.dataflow + " does not match fragment " + fid);
        }
        engine_.rewire(desc);
        res.json(200, Json{{"fragment", fid}, {"rewired", true}});
    });

    http_.post(R"(/fragments/([^/]+)/processors/([^/]+)/pause)", [this](const Request& req, Response& res) {
        const bool parked = engine_.pause(decode_capture(req.captures[0]), decode_capture(req.captures[1]));
        res.json(200, Json{{"state", "paused"}, {"parked", parked}});
    });

    http_.post(R"(/fragments/([^/]+)/processors/([^/]+)/resume)", [this](const Request& req, Response& res) {
        engine_.resume(decode_capture(req.captures[0]), decode_capture(req.captures[1]));
        res.json(200, Json{{"state", "running"}});
    });

    http_.get(R"(/fragments/([^/]+)/queues)", [this](const Request& req, Response& res) {
        res.json(200, engine_.queues(decode_capture(req.captures[0])));
    });

    http_.post(R"(/fragments/([^/]+)/queues/([^/]+)/take)", [this](const Request& req, Response& res) {
        auto batches = engine_.take(decode_capture(req.captures[0]), decode_capture(req.captures[1]));
        res.json(200, Json{{"batches", to_envelopes(batches)}});
    });

    http_.post(R"(/fragments/([^/]+)/queues/([^/]+)/inject)", [this](const Request& req, Response& res) {
        auto doc = parse_body(req);
        auto batches = from_envelopes(doc.value("batches", Json::array()));
        const auto n = batches.size();
        engine_.inject(decode_capture(req.captures[0]), decode_capture(req.captures[1]), std::move(batches));
        res.json(200, Json{{"injected", n}});
    });

    http_.get(R"(/fragments/([^/]+)/metrics)", [this](const Request& req, Response& res) {
        res.json(200, engine_.fragment_metrics(decode_capture(req.captures[0])));
    });

    http_.post(R"(/links/([^/]+)/batches)", [this](const Request& req, Response& res) {
        const auto batch = from_envelope(parse_body(req));
        const auto receipt = engine_.link_receive(decode_capture(req.captures[0]), batch);
        if (!receipt.accepted) {
            res.error(503, "link queue full");
            return;
        }
        Json body{{"accepted", true}};
        if (receipt.duplicate) {
            body["duplicate"] = true;
        }
        res.json(200, body);
    });

    http_.get(R"(/links/([^/]+)/batches)", [this](const Request& req, Response& res) {
        const auto max = static_cast<std::size_t>(std::stoul(req.param("max", "64")));
        const auto wait = std::chrono::milliseconds(std::min<long>(std::stol(req.param("wait_ms", "0")), 5000));
        const auto batches = engine_.link_serve(decode_capture(req.captures[0]), max, wait);
        res.json(200, Json{{"batches", to_envelopes(batches)}});
    });

    http_.post(R"(/links/([^/]+)/ack)", [this](const Request& req, Response& res) {
        const auto doc = parse_body(req);
        const auto ids = doc.value("batch_ids", Json::array()).get<std::set<std::string>>();
        res.json(200, Json{{"removed", engine_.link_ack(decode_capture(req.captures[0]), ids)}});
    });

    http_.post("/shutdown", [](const Request&, Response& res) {
        Shutdown::request();
        res.json(200, Json{{"stopping", true}});
    });
}

int EngineServer::start(const std::string& listen) {
    const int port = http_.bind(listen);
    http_.start();
    engine_.set_self_url(http_.url());
    return port;
}

void EngineServer::stop() { http_.stop(); }

int run_engine(EngineOptions options, const std::string& listen, const ProcessorRegistry& registry) {
    Shutdown::install();
    Engine engine(std::move(options), registry);
    EngineServer server(engine);
    const int port = server.start(listen);
    spdlog::info("engine {} listening on {}", engine.options().worker_id, server.url());
    announce_listening(port);
    engine.start_metrics();
    Shutdown::wait();
    spdlog::info("engine {} shutting down", engine.options().worker_id);
    server.stop();
    engine.shutdown();
    return 0;
}

}// namespace echo::engine
