// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#include <echo/engine/edge_queue.hpp>

namespace echo::engine {

using data::DataBatch;

EdgeQueue::EdgeQueue(std::size_t capacity) : capacity_(capacity == 0 ? 1 : capacity) {}

bool EdgeQueue::push(DataBatch batch) {
    {
        std::unique_lock lock(mu_);
        not_full_.wait(lock, [&] { return closed_ || items_.size() < capacity_; });
        if (closed_) {
            return false;
        }
        tuples_ += batch.count();
        items_.push_back(std::move(batch));
    }
    not_empty_.notify_all();
    notify_listener();
    return true;
}

bool EdgeQueue::try_push_for(DataBatch batch, std::chrono::milliseconds timeout) {
    {
        std::unique_lock lock(mu_);
        if (!not_full_.wait_for(lock, timeout, [&] { return closed_ || items_.size() < capacity_; }) || closed_) {
            return false;
        }
        tuples_ += batch.count();
        items_.push_back(std::move(batch));
    }
    not_empty_.notify_all();
    notify_listener();
    return true;
}

std::optional<DataBatch> EdgeQueue::try_pop() {
    std::optional<DataBatch> out;
    {
        std::lock_guard lock(mu_);
        if (items_.empty()) {
            return std::nullopt;
        }
        out = std::move(items_.front());
        items_.pop_front();
        tuples_ -= out->count();
    }
    not_full_.notify_all();
    return out;
}

std::optional<DataBatch> EdgeQueue::pop_for(std::chrono::milliseconds timeout) {
    std::optional<DataBatch> out;
    {
        std::unique_lock lock(mu_);
        if (!not_empty_.wait_for(lock, timeout, [&] { return closed_ || !items_.empty(); }) || items_.empty()) {
            return std::nullopt;
        }
        out = std::move(items_.front());
        items_.pop_front();
        tuples_ -= out->count();
    }
    not_full_.notify_all();
    return out;
}

std::vector<DataBatch> EdgeQueue::peek(std::size_t max, std::chrono::milliseconds wait) {
    std::unique_lock lock(mu_);
    if (wait.count() > 0) {
        not_empty_.wait_for(lock, wait, [&] { return closed_ || !items_.empty(); });
    }
    std::vector<DataBatch> out;
    for (std::size_t i = 0; i < items_.size() && out.size() < max; ++i) {
        out.push_back(items_[i]);
    }
    return out;
}

std::size_t EdgeQueue::remove_ids(const std::set<std::string>& ids) {
    std::size_t removed = 0;
    {
        std::lock_guard lock(mu_);
        for (auto it = items_.begin(); it != items_.end();) {
            if (ids.contains(it->id())) {
                tuples_ -= it->count();
                it = items_.erase(it);
                ++removed;
            } else {
                ++it;
            }
        }
    }
    if (removed > 0) {
        not_full_.notify_all();
    }
    return removed;
}

std::vector<DataBatch> EdgeQueue::take_all() {
    std::vector<DataBatch> out;
    {
        std::lock_guard lock(mu_);
        out.assign(std::make_move_iterator(items_.begin()), std::make_move_iterator(items_.end()));
        items_.clear();
        tuples_ = 0;
    }
    not_full_.notify_all();
    return out;
}

void EdgeQueue::inject(std::vector<DataBatch> batches) {
    if (batches.empty()) {
        return;
    }
    {
        std::lock_guard lock(mu_);
        for (auto& b : batches) {
            tuples_ += b.count();
            items_.push_back(std::move(b));
        }
    }
    not_empty_.notify_all();
    notify_listener();
}

std::size_t EdgeQueue::depth() const {
    std::lock_guard lock(mu_);
    return items_.size();
}

std::uint64_t EdgeQueue::tuples() const {
    std::lock_guard lock(mu_);
    return tuples_;
}

void EdgeQueue::close() {
    {
        std::lock_guard lock(mu_);
        closed_ = true;
    }
    not_full_.notify_all();
    not_empty_.notify_all();
}

bool EdgeQueue::closed() const {
    std::lock_guard lock(mu_);
    return closed_;
}

void EdgeQueue::set_listener(std::function<void()> listener) {
    std::lock_guard lock(mu_);
    listener_ = std::move(listener);
}

void EdgeQueue::notify_listener() {
    std::function<void()> fn;
    {
        std::lock_guard lock(mu_);
        fn = listener_;
    }
    if (fn) {
        fn();
    }
}

}// namespace echo::engine
