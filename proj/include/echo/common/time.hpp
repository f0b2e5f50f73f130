// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace echo {

using SysClock = std::chrono::system_clock;
using SteadyClock = std::chrono::steady_clock;
using Micros = std::chrono::microseconds;

/// Formats as "YYYY-MM-DDTHH:MM:SS.ffffffZ" (UTC, microsecond precision).
std::string iso8601_utc(SysClock::time_point tp);

/// Accepts the format above, with 0-9 fractional digits and a trailing 'Z'.
std::optional<SysClock::time_point> parse_iso8601(std::string_view text);

std::int64_t epoch_millis(SysClock::time_point tp);

inline std::string now_iso8601() { return iso8601_utc(SysClock::now()); }

}// namespace echo
