// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <echo/engine/edge_queue.hpp>
#include <echo/flowmodel/partition.hpp>

#include <json.hpp>

#include <atomic>
#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <unordered_set>

namespace echo::engine {

/// Remembers the most recent `capacity` batch ids.
class DedupWindow {
  public:
    explicit DedupWindow(std::size_t capacity = 4096) : capacity_(capacity) {}

    bool contains(const std::string& id) const;
    /// False when the id was already present.
    bool insert(const std::string& id);
    void erase(const std::string& id);
    std::size_t size() const;

  private:
    std::size_t capacity_;
    mutable std::mutex mu_;
    std::deque<std::string> order_;
    std::unordered_set<std::string> ids_;
};

struct Backoff {
    std::chrono::milliseconds base{200};
    std::chrono::milliseconds cap{5000};
    int degrade_after = 5;

    std::chrono::milliseconds delay(int failures) const;
};

/// One side of a cut edge.
///
/// Outbound push: a sender thread posts the front batch of the out-queue and
/// removes it only after the peer acknowledges, retrying the same batch id.
/// Outbound pull: the out-queue is served to the peer and entries are removed
/// on its ack. Inbound push: posted batches are deduplicated and enqueued.
/// Inbound pull: a client thread long-polls the peer, enqueues, then acks.
class RemoteLink {
  public:
    RemoteLink(flow::LinkDesc desc, std::shared_ptr<EdgeQueue> queue, std::string device, Backoff backoff = {});
    ~RemoteLink();

    RemoteLink(const RemoteLink&) = delete;
    RemoteLink& operator=(const RemoteLink&) = delete;

    const flow::LinkDesc& desc() const noexcept { return desc_; }
    const std::shared_ptr<EdgeQueue>& queue() const noexcept { return queue_; }

    /// Starts the client thread of outbound-push and inbound-pull links.
    void start();
    void stop();

    struct Receipt {
        bool accepted = false;
        bool duplicate = false;
    };
    /// Inbound push. Not accepted when the queue stayed full for `wait`.
    Receipt receive(const data::DataBatch& batch, std::chrono::milliseconds wait = std::chrono::milliseconds(500));
    /// Outbound pull.
    std::vector<data::DataBatch> serve(std::size_t max, std::chrono::milliseconds wait);
    std::size_t ack(const std::set<std::string>& ids);

    bool degraded() const noexcept { return degraded_; }
    nlohmann::json status() const;

  private:
    void push_loop();
    void pull_loop();
    void note_failure(const std::string& what, bool escalate);
    bool sleep_for(std::chrono::milliseconds d);

    flow::LinkDesc desc_;
    std::shared_ptr<EdgeQueue> queue_;
    std::string device_;
    Backoff backoff_;
    DedupWindow dedup_;

    std::atomic<bool> stop_{false};
    std::mutex sleep_mu_;
    std::condition_variable sleep_cv_;
    std::thread thread_;

    std::atomic<int> failures_{0};
    std::atomic<bool> degraded_{false};
    std::atomic<std::uint64_t> transferred_{0};
    std::atomic<std::uint64_t> duplicates_{0};
    mutable std::mutex err_mu_;
    std::string last_error_;
};

}// namespace echo::engine
