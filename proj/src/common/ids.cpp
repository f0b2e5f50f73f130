// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#include <echo/common/ids.hpp>

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <mutex>
#include <random>

namespace echo {

namespace {

std::uint64_t random_u64() {
    static std::mutex mu;
    static std::mt19937_64 rng{[] {
        std::random_device rd;
        std::seed_seq seq{rd(), rd(), rd(), rd()};
        return std::mt19937_64(seq);
    }()};
    std::lock_guard lock(mu);
    return rng();
}

std::uint64_t process_nonce() {
    static const std::uint64_t nonce = random_u64();
    return nonce;
}

}// namespace

std::string new_batch_id() {
    static std::atomic<std::uint64_t> seq{0};
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%016llx-%012llx", static_cast<unsigned long long>(process_nonce()),
                  static_cast<unsigned long long>(seq.fetch_add(1, std::memory_order_relaxed)));
    return buf;
}

std::string new_uuid() {
    std::uint64_t hi = random_u64();
    std::uint64_t lo = random_u64();
    hi = (hi & 0xffffffffffff0fffULL) | 0x0000000000004000ULL;
    lo = (lo & 0x3fffffffffffffffULL) | 0x8000000000000000ULL;
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%08llx-%04llx-%04llx-%04llx-%012llx", static_cast<unsigned long long>(hi >> 32),
                  static_cast<unsigned long long>((hi >> 16) & 0xffff), static_cast<unsigned long long>(hi & 0xffff),
                  static_cast<unsigned long long>(lo >> 48),
                  static_cast<unsigned long long>(lo & 0xffffffffffffULL));
    return buf;
}

std::string random_hex(std::size_t n) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(n);
    std::uint64_t bits = 0;
    int left = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (left == 0) {
            bits = random_u64();
            left = 16;
        }
        out.push_back(kDigits[bits & 0xf]);
        bits >>= 4;
        --left;
    }
    return out;
}

}// namespace echo
