// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>

namespace echo {

/// Speed of a worker relative to a reference core. An empty speed means the
/// worker is not throttled at all.
struct ThrottleProfile {
    std::string name;
    std::optional<double> speed;

    /// Known profiles: "unthrottled" / "cloud" (no throttle), "fog" (0.3),
    /// "edge-throttled" (0.05). Unknown names throw ValidationError.
    static ThrottleProfile named(const std::string& name);
};

/// Cooperative CPU throttle shared by every processor of a worker. Tokens are
/// microseconds of reference work; the bucket refills at
/// cpu_millis * 1000 * speed tokens per second and holds at most 100 ms worth.
class Throttle {
  public:
    Throttle(std::int64_t cpu_millis, ThrottleProfile profile);

    bool enabled() const noexcept { return rate_per_sec_ > 0; }
    double rate_per_sec() const noexcept { return rate_per_sec_; }

    /// Charges `work_us` and sleeps while the bucket is in debt.
    void charge(double work_us);

    /// Fraction of the refill rate consumed since the previous call, in percent.
    double utilisation_pct();

  private:
    void refill(std::chrono::steady_clock::time_point now);

    double rate_per_sec_ = 0;
    double burst_ = 0;
    std::mutex mu_;
    double tokens_ = 0;
    std::chrono::steady_clock::time_point last_;
    double charged_since_sample_ = 0;
    std::chrono::steady_clock::time_point last_sample_;
};

}// namespace echo
