// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>

namespace echo {

/// Process-wide stop flag set by SIGINT/SIGTERM or by request().
class Shutdown {
  public:
    /// Installs the signal handlers and ignores SIGPIPE.
    static void install();
    static void request();
    static bool requested();
    /// Blocks until a stop was requested or `timeout` passed. Returns requested().
    static bool wait_for(std::chrono::milliseconds timeout);
    static void wait();
};

}// namespace echo
