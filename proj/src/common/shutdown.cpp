// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#include <echo/common/shutdown.hpp>

#include <atomic>
#include <csignal>
#include <thread>

namespace echo {

namespace {

volatile std::sig_atomic_t g_signalled = 0;
std::atomic<bool> g_requested{false};

extern "C" void on_signal(int) { g_signalled = 1; }

}// namespace

void Shutdown::install() {
    struct sigaction sa {};
    sa.sa_handler = on_signal;
    sigemptyset(&sa.sa_mask);
    sigaction(SIGINT, &sa, nullptr);
    sigaction(SIGTERM, &sa, nullptr);
    std::signal(SIGPIPE, SIG_IGN);
}

void Shutdown::request() { g_requested = true; }

bool Shutdown::requested() { return g_requested || g_signalled != 0; }

bool Shutdown::wait_for(std::chrono::milliseconds timeout) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (!requested() && std::chrono::steady_clock::now() < deadline) {
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    return requested();
}

void Shutdown::wait() {
    while (!requested()) {
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
}

}// namespace echo
