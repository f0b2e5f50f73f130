// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#include <echo/common/error.hpp>
#include <echo/common/throttle.hpp>

#include <thread>

namespace echo {

ThrottleProfile ThrottleProfile::named(const std::string& name) {
    if (name == "unthrottled" || name == "cloud" || name.empty()) {
        return {name.empty() ? "unthrottled" : name, std::nullopt};
    }
    if (name == "fog") {
        return {name, 0.3};
    }
    if (name == "edge-throttled" || name == "edge") {
        return {name, 0.05};
    }
    throw ValidationError("unknown throttle profile '" + name + "'");
}

Throttle::Throttle(std::int64_t cpu_millis, ThrottleProfile profile) {
    if (profile.speed && cpu_millis > 0) {
        rate_per_sec_ = static_cast<double>(cpu_millis) * 1000.0 * *profile.speed;
        burst_ = rate_per_sec_ * 0.1;
        tokens_ = burst_;
    }
    last_ = last_sample_ = std::chrono::steady_clock::now();
}

void Throttle::refill(std::chrono::steady_clock::time_point now) {
    const double elapsed = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    tokens_ = std::min(burst_, tokens_ + elapsed * rate_per_sec_);
}

void Throttle::charge(double work_us) {
    if (!enabled() || work_us <= 0) {
        return;
    }
    double debt = 0;
    {
        std::lock_guard lock(mu_);
        refill(std::chrono::steady_clock::now());
        tokens_ -= work_us;
        charged_since_sample_ += work_us;
        if (tokens_ < 0) {
            debt = -tokens_;
        }
    }
    if (debt > 0) {
        std::this_thread::sleep_for(std::chrono::duration<double>(debt / rate_per_sec_));
    }
}

double Throttle::utilisation_pct() {
    std::lock_guard lock(mu_);
    const auto now = std::chrono::steady_clock::now();
    const double wall = std::chrono::duration<double>(now - last_sample_).count();
    double pct = 0;
    if (enabled() && wall > 0) {
        pct = 100.0 * charged_since_sample_ / (rate_per_sec_ * wall);
    }
    charged_since_sample_ = 0;
    last_sample_ = now;
    return pct;
}

}// namespace echo
