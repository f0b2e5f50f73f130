// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <echo/databatch/batch.hpp>

#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace echo::engine {

/// Bounded FIFO of batches with blocking enqueue (backpressure).
class EdgeQueue {
  public:
    static constexpr std::size_t kDefaultCapacity = 1024;

    explicit EdgeQueue(std::size_t capacity = kDefaultCapacity);

    /// Blocks while full. False once the queue is closed.
    bool push(data::DataBatch batch);
    bool try_push_for(data::DataBatch batch, std::chrono::milliseconds timeout);

    std::optional<data::DataBatch> try_pop();
    std::optional<data::DataBatch> pop_for(std::chrono::milliseconds timeout);

    /// Up to `max` batches from the front, left in place. Waits up to `wait`
    /// for the queue to become non-empty.
    std::vector<data::DataBatch> peek(std::size_t max, std::chrono::milliseconds wait = {});
    /// Removes the given ids wherever they sit. Returns how many were removed.
    std::size_t remove_ids(const std::set<std::string>& ids);

    /// Empties the queue, returning its content in FIFO order.
    std::vector<data::DataBatch> take_all();
    /// Appends without regard to capacity (migration transfer).
    void inject(std::vector<data::DataBatch> batches);

    std::size_t depth() const;
    std::uint64_t tuples() const;
    std::size_t capacity() const noexcept { return capacity_; }

    /// Wakes blocked callers; later pushes fail.
    void close();
    bool closed() const;

    /// Called (outside the lock) after every successful enqueue.
    void set_listener(std::function<void()> listener);

  private:
    void notify_listener();

    const std::size_t capacity_;
    mutable std::mutex mu_;
    std::condition_variable not_full_;
    std::condition_variable not_empty_;
    std::deque<data::DataBatch> items_;
    std::uint64_t tuples_ = 0;
    bool closed_ = false;
    std::function<void()> listener_;
};

}// namespace echo::engine
