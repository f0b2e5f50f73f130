// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#include <echo/common/error.hpp>
#include <echo/engine/links.hpp>
#include <echo/engine/wire.hpp>
#include <echo/net/http.hpp>

#include <spdlog/spdlog.h>

namespace echo::engine {

using data::DataBatch;
using flow::LinkDirection;
using Json = nlohmann::json;

bool DedupWindow::contains(const std::string& id) const {
    std::lock_guard lock(mu_);
    return ids_.contains(id);
}

bool DedupWindow::insert(const std::string& id) {
    std::lock_guard lock(mu_);
    if (!ids_.insert(id).second) {
        return false;
    }
    order_.push_back(id);
    while (order_.size() > capacity_) {
        ids_.erase(order_.front());
        order_.pop_front();
    }
    return true;
}

void DedupWindow::erase(const std::string& id) {
    std::lock_guard lock(mu_);
    if (ids_.erase(id) > 0) {
        for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
            if (*it == id) {
                order_.erase(std::next(it).base());
                break;
            }
        }
    }
}

std::size_t DedupWindow::size() const {
    std::lock_guard lock(mu_);
    return ids_.size();
}

std::chrono::milliseconds Backoff::delay(int failures) const {
    if (failures <= 0) {
        return std::chrono::milliseconds(0);
    }
    auto d = base;
    for (int i = 1; i < failures && d < cap; ++i) {
        d *= 2;
    }
    return std::min(d, cap);
}

RemoteLink::RemoteLink(flow::LinkDesc desc, std::shared_ptr<EdgeQueue> queue, std::string device, Backoff backoff)
    : desc_(std::move(desc)), queue_(std::move(queue)), device_(std::move(device)), backoff_(backoff) {}

RemoteLink::~RemoteLink() { stop(); }

void RemoteLink::start() {
    if (thread_.joinable()) {
        return;
    }
    stop_ = false;
    if (desc_.outbound && desc_.direction == LinkDirection::push) {
        thread_ = std::thread([this] { push_loop(); });
    } else if (!desc_.outbound && desc_.direction == LinkDirection::pull) {
        thread_ = std::thread([this] { pull_loop(); });
    }
}

void RemoteLink::stop() {
    {
        std::lock_guard lock(sleep_mu_);
        stop_ = true;
    }
    sleep_cv_.notify_all();
    if (thread_.joinable()) {
        thread_.join();
    }
}

bool RemoteLink::sleep_for(std::chrono::milliseconds d) {
    std::unique_lock lock(sleep_mu_);
    return !sleep_cv_.wait_for(lock, d, [&] { return stop_.load(); });
}

void RemoteLink::note_failure(const std::string& what, bool escalate) {
    {
        std::lock_guard lock(err_mu_);
        last_error_ = what;
    }
    if (!escalate) {
        sleep_for(backoff_.base);
        return;
    }
    const int f = ++failures_;
    if (f >= backoff_.degrade_after && !degraded_.exchange(true)) {
        spdlog::warn("link {}: degraded after {} failures: {}", desc_.id, f, what);
    }
    sleep_for(backoff_.delay(f));
}

void RemoteLink::push_loop() {
    net::ClientOptions opts;
    opts.read_timeout = std::chrono::milliseconds(5000);
    net::HttpClient client(desc_.peer_url, opts);
    client.set_header(kDeviceHeader, device_);
    const std::string path = "/links/" + net::url_encode(desc_.id) + "/batches";
    while (!stop_) {
        auto front = queue_->peek(1, std::chrono::milliseconds(200));
        if (front.empty()) {
            continue;
        }
        const auto& batch = front.front();
        const auto r = client.post_json(path, to_envelope(batch));
        if (r.ok()) {
            queue_->remove_ids({batch.id()});
            ++transferred_;
            failures_ = 0;
            degraded_ = false;
            continue;
        }
        // 503: receiver queue full (backpressure). 404: peer side not provisioned yet.
        const bool transient = r.status == 503 || r.status == 404;
        note_failure(r.message(), !transient);
    }
}

void RemoteLink::pull_loop() {
    net::ClientOptions opts;
    opts.read_timeout = std::chrono::milliseconds(6000);
    net::HttpClient client(desc_.peer_url, opts);
    client.set_header(kDeviceHeader, device_);
    const std::string base = "/links/" + net::url_encode(desc_.id);
    while (!stop_) {
        const auto r = client.get(base + "/batches?max=64&wait_ms=1000");
        if (!r.ok()) {
            note_failure(r.message(), r.status != 404);
            continue;
        }
        std::vector<DataBatch> batches;
        try {
            batches = from_envelopes(r.json().at("batches"));
        } catch (const std::exception& e) {
            note_failure(e.what(), true);
            continue;
        }
        Json ids = Json::array();
        for (const auto& b : batches) {
            if (dedup_.contains(b.id())) {
                ++duplicates_;
                ids.push_back(b.id());
                continue;
            }
            bool pushed = false;
            while (!stop_ && !(pushed = queue_->try_push_for(b, std::chrono::milliseconds(200)))) {
            }
            if (!pushed) {
                break;
            }
            dedup_.insert(b.id());
            ++transferred_;
            ids.push_back(b.id());
        }
        if (ids.empty()) {
            failures_ = 0;
            degraded_ = false;
            continue;
        }
        // An ack lost here only causes a re-delivery that the dedup window absorbs.
        const auto a = client.post_json(base + "/ack", Json{{"batch_ids", ids}});
        if (a.ok()) {
            failures_ = 0;
            degraded_ = false;
        } else {
            note_failure(a.message(), a.status != 404);
        }
    }
}

RemoteLink::Receipt RemoteLink::receive(const DataBatch& batch, std::chrono::milliseconds wait) {
    if (!dedup_.insert(batch.id())) {
        ++duplicates_;
        return {true, true};
    }
    if (!queue_->try_push_for(batch, wait)) {
        dedup_.erase(batch.id());
        return {false, false};
    }
    ++transferred_;
    return {true, false};
}

std::vector<DataBatch> RemoteLink::serve(std::size_t max, std::chrono::milliseconds wait) { return queue_->peek(max, wait); }

std::size_t RemoteLink::ack(const std::set<std::string>& ids) {
    const auto n = queue_->remove_ids(ids);
    transferred_ += n;
    return n;
}

Json RemoteLink::status() const {
    std::string err;
    {
        std::lock_guard lock(err_mu_);
        err = last_error_;
    }
    return Json{{"id", desc_.id},
                {"edge", desc_.edge_key},
                {"direction", flow::to_string(desc_.direction)},
                {"outbound", desc_.outbound},
                {"peer", desc_.peer_url},
                {"state", degraded_ ? "degraded" : "ok"},
                {"failures", failures_.load()},
                {"transferred", transferred_.load()},
                {"duplicates", duplicates_.load()},
                {"depth", queue_->depth()},
                {"last_error", err}};
}

}// namespace echo::engine
