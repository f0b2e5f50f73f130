// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#include <echo/common/error.hpp>
#include <echo/engine/links.hpp>
#include <echo/engine/wire.hpp>
#include <echo/net/http.hpp>
#include <echo/wrappers/bridge.hpp>

#include <spdlog/spdlog.h>

#include <deque>
#include <thread>

namespace echo::wrappers {

using data::DataBatch;
using Json = nlohmann::json;

BridgeSpec BridgeSpec::from_json(const Json& config) {
    BridgeSpec s;
    s.endpoint = config.value("endpoint", std::string());
    s.ingress = config.value("ingress", std::string());
    s.egress = config.value("egress", std::string());
    s.drain_timeout = std::chrono::milliseconds(config.value("drain_timeout_ms", std::int64_t{10000}));
    if (s.endpoint.empty() || s.ingress.empty() || s.egress.empty()) {
        throw ValidationError("bridge needs endpoint, ingress and egress");
    }
    if (s.ingress == s.egress) {
        throw ValidationError("bridge ingress and egress link ids must differ");
    }
    return s;
}

namespace {

class BridgeLogic final : public engine::ProcessorLogic {
  public:
    BridgeLogic(BridgeSpec spec, engine::ProcessorContext ctx) : spec_(std::move(spec)), ctx_(std::move(ctx)) {
        puller_ = std::thread([this] { pull_loop(); });
    }

    ~BridgeLogic() override {
        stop_ = true;
        if (puller_.joinable()) {
            puller_.join();
        }
    }

    void on_batch(const DataBatch& batch, engine::Emitter& out) override {
        net::ClientOptions opts;
        opts.read_timeout = std::chrono::milliseconds(5000);
        net::HttpClient client(spec_.endpoint, opts);
        client.set_header(engine::kDeviceHeader, ctx_.device);
        client.set_header(kReplyToHeader, spec_.egress);
        const auto path = "/links/" + net::url_encode(spec_.ingress) + "/batches";
        const auto envelope = engine::to_envelope(batch);
        int failures = 0;
        while (!ctx_.cancel->load()) {
            const auto r = client.post_json(path, envelope);
            if (r.ok()) {
                if (!r.json().value("duplicate", false)) {
                    ++sent_;
                }
                break;
            }
            if (r.status != 503) {
                ++failures;
                degraded_ = failures >= backoff_.degrade_after;
            }
            drain(out);
            std::this_thread::sleep_for(r.status == 503 ? backoff_.base : backoff_.delay(failures));
        }
        drain(out);
    }

    void on_tick(engine::Emitter& out) override { drain(out); }

    void on_close(engine::Emitter& out) override {
        const auto deadline = std::chrono::steady_clock::now() + spec_.drain_timeout;
        while (received_ < sent_ && std::chrono::steady_clock::now() < deadline && !ctx_.cancel->load()) {
            drain(out);
            std::this_thread::sleep_for(std::chrono::milliseconds(20));
        }
        drain(out);
        if (received_ < sent_) {
            spdlog::warn("bridge: {} of {} batches never came back from {}", sent_ - received_, sent_, spec_.endpoint);
        }
    }

    nlohmann::json stats() const override {
        return {{"sent", sent_.load()}, {"received", received_.load()}, {"degraded", degraded_.load()}};
    }

  private:
    void drain(engine::Emitter& out) {
        std::deque<DataBatch> ready;
        {
            std::lock_guard lock(mu_);
            ready.swap(inbox_);
        }
        for (const auto& b : ready) {
            out.emit_batch(b);
        }
    }

    void pull_loop() {
        net::ClientOptions opts;
        opts.read_timeout = std::chrono::milliseconds(5000);
        net::HttpClient client(spec_.endpoint, opts);
        client.set_header(engine::kDeviceHeader, ctx_.device);
        const auto base = "/links/" + net::url_encode(spec_.egress);
        int failures = 0;
        while (!stop_) {
            const auto r = client.get(base + "/batches?max=64&wait_ms=300");
            if (!r.ok()) {
                ++failures;
                std::this_thread::sleep_for(std::min(backoff_.delay(failures), std::chrono::milliseconds(1000)));
                continue;
            }
            failures = 0;
            Json ids = Json::array();
            try {
                for (auto& b : engine::from_envelopes(r.json().at("batches"))) {
                    ids.push_back(b.id());
                    if (!seen_.insert(b.id())) {
                        continue;
                    }
                    ++received_;
                    std::lock_guard lock(mu_);
                    inbox_.push_back(std::move(b));
                }
            } catch (const std::exception& e) {
                spdlog::warn("bridge: bad reply from {}: {}", spec_.endpoint, e.what());
            }
            if (!ids.empty()) {
                client.post_json(base + "/ack", Json{{"batch_ids", ids}});
            }
        }
    }

    BridgeSpec spec_;
    engine::ProcessorContext ctx_;
    engine::Backoff backoff_;
    engine::DedupWindow seen_;
    std::atomic<bool> stop_{false};
    std::atomic<bool> degraded_{false};
    std::atomic<std::uint64_t> sent_{0};
    std::atomic<std::uint64_t> received_{0};
    std::mutex mu_;
    std::deque<DataBatch> inbox_;
    std::thread puller_;
};

}// namespace

std::unique_ptr<engine::ProcessorLogic> make_bridge(const flow::ProcessorSpec& spec, const engine::ProcessorContext& ctx) {
    return std::make_unique<BridgeLogic>(BridgeSpec::from_json(spec.config), ctx);
}

}// namespace echo::wrappers
