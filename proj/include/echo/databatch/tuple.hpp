// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <echo/databatch/batch.hpp>

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace echo::data {

/// A SenML-shaped record. Wire form is one JSON object per line:
/// {"n":name,"v":value,"u":unit,"t":epoch-millis}.
struct EventTuple {
    std::string name;
    double value = 0.0;
    std::string unit;
    std::int64_t timestamp = 0;

    bool operator==(const EventTuple& other) const;
};

/// Appends the wire form of `t` (without newline). Throws ValidationError for
/// a negative timestamp or a non-finite value.
void encode_tuple(const EventTuple& t, std::string& out);
std::string encode_tuple(const EventTuple& t);
/// Throws ParseError.
EventTuple decode_tuple(std::string_view line);

struct WindowPolicy {
    enum class Mode { count, time };
    Mode mode = Mode::count;
    std::uint64_t count_n = 50;
    std::int64_t duration_ms = 0;
    bool flush_on_close = true;

    static WindowPolicy count(std::uint64_t n, bool flush_on_close = true);
    static WindowPolicy time(std::int64_t ms, bool flush_on_close = true);
    /// From {"mode":"count","n":N} or {"mode":"time","ms":M}, plus optional
    /// "flush_on_close". Null or absent means count n=50.
    static WindowPolicy from_json(const nlohmann::json& doc);

    /// Throws ValidationError.
    void validate() const;
};

/// Accumulates tuples into micro-batches. Time windows use processing time:
/// a window opens at its first tuple and closes `duration_ms` later.
class StreamBatcher {
  public:
    using Clock = std::chrono::steady_clock;

    explicit StreamBatcher(WindowPolicy policy, Attributes extra = {});

    /// Returns a batch when `t` completes a window.
    std::optional<DataBatch> push(const EventTuple& t, Clock::time_point now = Clock::now());
    /// Closes an expired time window.
    std::optional<DataBatch> tick(Clock::time_point now = Clock::now());
    /// Emits the partial window when flush_on_close is set, else drops it.
    std::optional<DataBatch> close();
    /// Emits any partial window regardless of policy.
    std::optional<DataBatch> flush();

    std::uint64_t pending() const noexcept { return pending_; }
    const WindowPolicy& policy() const noexcept { return policy_; }

  private:
    std::optional<DataBatch> emit();

    WindowPolicy policy_;
    Attributes extra_;
    std::string buffer_;
    std::uint64_t pending_ = 0;
    Clock::time_point opened_{};
};

std::vector<DataBatch> stream_to_batch(const std::vector<EventTuple>& events, const WindowPolicy& policy);

/// Decodes the tuples of a batch in stored order. Throws ParseError naming the
/// 1-based line of a malformed tuple and IntegrityError when the line count
/// disagrees with batch.count. An empty opaque batch yields nothing; a
/// non-empty opaque batch is rejected with ParseError.
std::vector<EventTuple> batch_to_stream(const DataBatch& batch);

/// Counts non-empty lines.
std::uint64_t count_lines(std::string_view content);

}// namespace echo::data
