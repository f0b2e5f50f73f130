// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#include <echo/common/time.hpp>

#include <charconv>
#include <cstdio>
#include <ctime>

namespace echo {

std::string iso8601_utc(SysClock::time_point tp) {
    const auto us = std::chrono::duration_cast<Micros>(tp.time_since_epoch()).count();
    std::int64_t secs = us / 1'000'000;
    std::int64_t frac = us % 1'000'000;
    if (frac < 0) {
        frac += 1'000'000;
        secs -= 1;
    }
    const std::time_t t = static_cast<std::time_t>(secs);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%06lldZ", tm.tm_year + 1900, tm.tm_mon + 1,
                  tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<long long>(frac));
    return buf;
}

namespace {
bool read_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > s.size()) {
        return false;
    }
    auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, out);
    return ec == std::errc() && ptr == s.data() + pos + len;
}
}// namespace

std::optional<SysClock::time_point> parse_iso8601(std::string_view s) {
    // 2026-10-16T12:34:56[.ffffff]Z
    if (s.size() < 20 || s[4] != '-' || s[7] != '-' || s[10] != 'T' || s[13] != ':' || s[16] != ':'
        || s.back() != 'Z') {
        return std::nullopt;
    }
    std::tm tm{};
    int year, mon, day, hour, min, sec;
    if (!read_int(s, 0, 4, year) || !read_int(s, 5, 2, mon) || !read_int(s, 8, 2, day) || !read_int(s, 11, 2, hour)
        || !read_int(s, 14, 2, min) || !read_int(s, 17, 2, sec)) {
        return std::nullopt;
    }
    if (mon < 1 || mon > 12 || day < 1 || day > 31 || hour > 23 || min > 59 || sec > 60) {
        return std::nullopt;
    }
    std::int64_t micros = 0;
    std::size_t pos = 19;
    if (s[pos] == '.') {
        ++pos;
        int digits = 0;
        while (pos < s.size() - 1) {
            const char c = s[pos];
            if (c < '0' || c > '9' || digits >= 9) {
                return std::nullopt;
            }
            if (digits < 6) {
                micros = micros * 10 + (c - '0');
            }
            ++digits;
            ++pos;
        }
        if (digits == 0) {
            return std::nullopt;
        }
        for (int d = digits; d < 6; ++d) {
            micros *= 10;
        }
    }
    if (pos != s.size() - 1) {
        return std::nullopt;
    }
    tm.tm_year = year - 1900;
    tm.tm_mon = mon - 1;
    tm.tm_mday = day;
    tm.tm_hour = hour;
    tm.tm_min = min;
    tm.tm_sec = sec;
    const std::time_t t = timegm(&tm);
    return SysClock::time_point(Micros(static_cast<std::int64_t>(t) * 1'000'000 + micros));
}

std::int64_t epoch_millis(SysClock::time_point tp) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(tp.time_since_epoch()).count();
}

}// namespace echo
