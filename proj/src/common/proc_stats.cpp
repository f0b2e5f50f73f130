// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#include <echo/common/proc_stats.hpp>

#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>

namespace echo {

std::optional<ProcSample> sample_process(pid_t pid) {
    const std::string base = "/proc/" + std::to_string(pid);
    std::ifstream stat(base + "/stat");
    std::string line;
    if (!stat || !std::getline(stat, line)) {
        return std::nullopt;
    }
    // The command name may contain spaces; fields resume after the last ')'.
    const auto close = line.rfind(')');
    if (close == std::string::npos) {
        return std::nullopt;
    }
    std::istringstream rest(line.substr(close + 2));
    std::string field;
    ProcSample sample;
    unsigned long long utime = 0, stime = 0;
    // Fields 3..: state(3) ... utime(14) stime(15).
    for (int idx = 3; idx <= 15 && rest >> field; ++idx) {
        if (idx == 3 && field == "Z") {
            return std::nullopt;
        }
        if (idx == 14) {
            utime = std::stoull(field);
        } else if (idx == 15) {
            stime = std::stoull(field);
        }
    }
    static const long ticks = sysconf(_SC_CLK_TCK);
    sample.cpu_seconds = static_cast<double>(utime + stime) / static_cast<double>(ticks);

    std::ifstream statm(base + "/statm");
    unsigned long long size = 0, resident = 0;
    if (statm >> size >> resident) {
        static const long page = sysconf(_SC_PAGESIZE);
        sample.rss_bytes = resident * static_cast<unsigned long long>(page);
    }
    return sample;
}

double CpuMeter::update(double cpu_seconds, std::chrono::steady_clock::time_point now, std::int64_t capacity_millis) {
    double pct = 0;
    if (last_cpu_ && capacity_millis > 0) {
        const double wall = std::chrono::duration<double>(now - last_time_).count();
        if (wall > 0) {
            const double cores = (cpu_seconds - *last_cpu_) / wall;
            pct = 100.0 * cores / (static_cast<double>(capacity_millis) / 1000.0);
        }
    }
    last_cpu_ = cpu_seconds;
    last_time_ = now;
    return pct < 0 ? 0 : pct;
}

}// namespace echo
