// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <sys/types.h>

namespace echo {

/// A supervised child process. The destructor kills a still-running child.
class Subprocess {
  public:
    struct Options {
        std::vector<std::string> argv;
        std::map<std::string, std::string> env;///< added to / overriding the parent environment
        std::filesystem::path workdir;
        std::filesystem::path stdout_file;///< ignored when capture_stdout is set
        std::filesystem::path stderr_file;
        bool capture_stdout = false;
        bool die_with_parent = true;
    };

    Subprocess() = default;
    Subprocess(const Subprocess&) = delete;
    Subprocess& operator=(const Subprocess&) = delete;
    Subprocess(Subprocess&& other) noexcept;
    Subprocess& operator=(Subprocess&& other) noexcept;
    ~Subprocess();

    /// Throws IoError when the program cannot be started.
    static Subprocess spawn(const Options& options);

    pid_t pid() const noexcept { return pid_; }
    bool valid() const noexcept { return pid_ > 0; }

    /// Non-blocking reap. Returns the exit status once the child has exited
    /// (128 + signal number for a signalled child).
    std::optional<int> try_wait();
    bool running() { return valid() && !try_wait().has_value(); }
    std::optional<int> wait_for(std::chrono::milliseconds timeout);
    int wait();

    void signal(int sig) const;

    /// SIGTERM, then SIGKILL after `grace`. Returns the exit status.
    int terminate(std::chrono::milliseconds grace = std::chrono::milliseconds(3000));

    /// Reads one line from the captured stdout pipe.
    std::optional<std::string> read_line(std::chrono::milliseconds timeout);

    /// Releases ownership without killing (the child keeps running).
    pid_t release();

  private:
    void reset() noexcept;

    pid_t pid_ = -1;
    int stdout_fd_ = -1;
    std::optional<int> status_;
    std::string pending_;
};

struct RunResult {
    int exit_code = -1;
    bool timed_out = false;
};

/// Runs a command to completion, killing it after `timeout`.
RunResult run_command(const std::vector<std::string>& argv, const std::filesystem::path& workdir,
                      std::chrono::milliseconds timeout);

/// Starts a service child that announces "LISTENING <port>" on stdout and
/// returns the announced port. Throws IoError if the child exits first or stays
/// silent past `timeout`.
int await_listening(Subprocess& child, std::chrono::milliseconds timeout);

/// Announces a bound port to a supervising parent.
void announce_listening(int port);

}// namespace echo
