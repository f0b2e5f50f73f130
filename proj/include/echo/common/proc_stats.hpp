// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstdint>
#include <optional>

#include <sys/types.h>

namespace echo {

struct ProcSample {
    double cpu_seconds = 0;///< user + system time consumed so far
    std::uint64_t rss_bytes = 0;
};

/// Reads /proc/<pid>/stat and /proc/<pid>/statm. Empty when the process is gone.
std::optional<ProcSample> sample_process(pid_t pid);

/// Turns successive cpu_seconds samples into a utilisation percentage of a
/// capacity expressed in milli-cores.
class CpuMeter {
  public:
    double update(double cpu_seconds, std::chrono::steady_clock::time_point now, std::int64_t capacity_millis);

  private:
    std::optional<double> last_cpu_;
    std::chrono::steady_clock::time_point last_time_{};
};

}// namespace echo
