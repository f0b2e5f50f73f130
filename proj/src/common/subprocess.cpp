// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#include <echo/common/error.hpp>
#include <echo/common/subprocess.hpp>

#include <cerrno>
#include <csignal>
#include <cstdio>
#include <cstring>
#include <thread>

#include <fcntl.h>
#include <poll.h>
#include <sys/prctl.h>
#include <sys/wait.h>
#include <unistd.h>

extern char** environ;

namespace echo {

namespace {

int decode_status(int status) {
    if (WIFEXITED(status)) {
        return WEXITSTATUS(status);
    }
    if (WIFSIGNALED(status)) {
        return 128 + WTERMSIG(status);
    }
    return -1;
}

[[noreturn]] void child_fail(const char* what) {
    const char* msg = std::strerror(errno);
    (void) !write(STDERR_FILENO, what, std::strlen(what));
    (void) !write(STDERR_FILENO, ": ", 2);
    (void) !write(STDERR_FILENO, msg, std::strlen(msg));
    (void) !write(STDERR_FILENO, "\n", 1);
    _exit(127);
}

int open_out(const std::filesystem::path& p) { return ::open(p.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644); }

}// namespace

Subprocess::Subprocess(Subprocess&& other) noexcept
    : pid_(other.pid_), stdout_fd_(other.stdout_fd_), status_(other.status_), pending_(std::move(other.pending_)) {
    other.pid_ = -1;
    other.stdout_fd_ = -1;
}

Subprocess& Subprocess::operator=(Subprocess&& other) noexcept {
    if (this != &other) {
        reset();
        pid_ = other.pid_;
        stdout_fd_ = other.stdout_fd_;
        status_ = other.status_;
        pending_ = std::move(other.pending_);
        other.pid_ = -1;
        other.stdout_fd_ = -1;
    }
    return *this;
}

Subprocess::~Subprocess() { reset(); }

void Subprocess::reset() noexcept {
    if (pid_ > 0 && !status_) {
        ::kill(pid_, SIGKILL);
        int st = 0;
        ::waitpid(pid_, &st, 0);
    }
    if (stdout_fd_ >= 0) {
        ::close(stdout_fd_);
    }
    pid_ = -1;
    stdout_fd_ = -1;
    status_.reset();
}

Subprocess Subprocess::spawn(const Options& options) {
    if (options.argv.empty()) {
        throw IoError("spawn: empty argv");
    }
    int pipefd[2] = {-1, -1};
    if (options.capture_stdout && ::pipe2(pipefd, O_CLOEXEC) != 0) {
        throw IoError(std::string("spawn: pipe: ") + std::strerror(errno));
    }

    std::vector<std::string> env_storage;
    for (char** e = environ; *e != nullptr; ++e) {
        std::string entry(*e);
        const auto eq = entry.find('=');
        if (eq != std::string::npos && options.env.contains(entry.substr(0, eq))) {
            continue;
        }
        env_storage.push_back(std::move(entry));
    }
    for (const auto& [k, v] : options.env) {
        env_storage.push_back(k + "=" + v);
    }
    std::vector<char*> envp;
    for (auto& e : env_storage) {
        envp.push_back(e.data());
    }
    envp.push_back(nullptr);
    std::vector<std::string> argv_storage = options.argv;
    std::vector<char*> argv;
    for (auto& a : argv_storage) {
        argv.push_back(a.data());
    }
    argv.push_back(nullptr);

    const pid_t parent = ::getpid();
    const pid_t pid = ::fork();
    if (pid < 0) {
        throw IoError(std::string("spawn: fork: ") + std::strerror(errno));
    }
    if (pid == 0) {
        if (options.die_with_parent) {
            ::prctl(PR_SET_PDEATHSIG, SIGKILL);
            if (::getppid() != parent) {
                _exit(1);
            }
        }
        ::signal(SIGPIPE, SIG_DFL);
        if (options.capture_stdout) {
            ::dup2(pipefd[1], STDOUT_FILENO);
        } else if (!options.stdout_file.empty()) {
            const int fd = open_out(options.stdout_file);
            if (fd < 0) {
                child_fail("open stdout");
            }
            ::dup2(fd, STDOUT_FILENO);
        }
        if (!options.stderr_file.empty()) {
            const int fd = open_out(options.stderr_file);
            if (fd < 0) {
                child_fail("open stderr");
            }
            ::dup2(fd, STDERR_FILENO);
        }
        if (!options.workdir.empty() && ::chdir(options.workdir.c_str()) != 0) {
            child_fail("chdir");
        }
        ::execve(argv[0], argv.data(), envp.data());
        if (std::strchr(argv[0], '/') == nullptr) {
            ::execvpe(argv[0], argv.data(), envp.data());
        }
        child_fail(argv[0]);
    }

    Subprocess sp;
    sp.pid_ = pid;
    if (options.capture_stdout) {
        ::close(pipefd[1]);
        sp.stdout_fd_ = pipefd[0];
    }
    return sp;
}

std::optional<int> Subprocess::try_wait() {
    if (status_ || pid_ <= 0) {
        return status_;
    }
    int st = 0;
    const pid_t r = ::waitpid(pid_, &st, WNOHANG);
    if (r == pid_) {
        status_ = decode_status(st);
    } else if (r < 0 && errno == ECHILD) {
        status_ = -1;
    }
    return status_;
}

std::optional<int> Subprocess::wait_for(std::chrono::milliseconds timeout) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    auto delay = std::chrono::milliseconds(1);
    while (true) {
        if (auto st = try_wait()) {
            return st;
        }
        if (std::chrono::steady_clock::now() >= deadline) {
            return std::nullopt;
        }
        std::this_thread::sleep_for(delay);
        delay = std::min(delay * 2, std::chrono::milliseconds(50));
    }
}

int Subprocess::wait() {
    if (status_ || pid_ <= 0) {
        return status_.value_or(-1);
    }
    int st = 0;
    while (::waitpid(pid_, &st, 0) < 0) {
        if (errno != EINTR) {
            status_ = -1;
            return -1;
        }
    }
    status_ = decode_status(st);
    return *status_;
}

void Subprocess::signal(int sig) const {
    if (pid_ > 0 && !status_) {
        ::kill(pid_, sig);
    }
}

int Subprocess::terminate(std::chrono::milliseconds grace) {
    if (pid_ <= 0) {
        return -1;
    }
    if (auto st = try_wait()) {
        return *st;
    }
    signal(SIGTERM);
    if (auto st = wait_for(grace)) {
        return *st;
    }
    signal(SIGKILL);
    return wait();
}

std::optional<std::string> Subprocess::read_line(std::chrono::milliseconds timeout) {
    if (stdout_fd_ < 0) {
        return std::nullopt;
    }
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (true) {
        if (const auto nl = pending_.find('\n'); nl != std::string::npos) {
            std::string line = pending_.substr(0, nl);
            pending_.erase(0, nl + 1);
            return line;
        }
        const auto left =
            std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) {
            return std::nullopt;
        }
        pollfd pfd{stdout_fd_, POLLIN, 0};
        const int r = ::poll(&pfd, 1, static_cast<int>(left.count()));
        if (r < 0 && errno == EINTR) {
            continue;
        }
        if (r <= 0) {
            return std::nullopt;
        }
        char buf[512];
        const ssize_t n = ::read(stdout_fd_, buf, sizeof(buf));
        if (n <= 0) {
            return std::nullopt;
        }
        pending_.append(buf, static_cast<std::size_t>(n));
    }
}

pid_t Subprocess::release() {
    const pid_t p = pid_;
    if (stdout_fd_ >= 0) {
        ::close(stdout_fd_);
    }
    pid_ = -1;
    stdout_fd_ = -1;
    return p;
}

RunResult run_command(const std::vector<std::string>& argv, const std::filesystem::path& workdir,
                      std::chrono::milliseconds timeout) {
    Subprocess::Options opts;
    opts.argv = argv;
    opts.workdir = workdir;
    auto child = Subprocess::spawn(opts);
    RunResult result;
    if (auto st = child.wait_for(timeout)) {
        result.exit_code = *st;
        return result;
    }
    result.timed_out = true;
    child.signal(SIGKILL);
    result.exit_code = child.wait();
    return result;
}

int await_listening(Subprocess& child, std::chrono::milliseconds timeout) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (std::chrono::steady_clock::now() < deadline) {
        const auto left =
            std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        auto line = child.read_line(left);
        if (!line) {
            break;
        }
        if (line->rfind("LISTENING ", 0) == 0) {
            return std::stoi(line->substr(10));
        }
    }
    if (auto st = child.try_wait()) {
        throw IoError("child " + std::to_string(child.pid()) + " exited with status " + std::to_string(*st)
                      + " before listening");
    }
    throw IoError("child " + std::to_string(child.pid()) + " did not announce a listening port");
}

void announce_listening(int port) {
    std::printf("LISTENING %d\n", port);
    std::fflush(stdout);
}

}// namespace echo
