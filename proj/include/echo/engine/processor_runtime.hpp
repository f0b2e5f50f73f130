// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <echo/databatch/tuple.hpp>
#include <echo/engine/edge_queue.hpp>
#include <echo/engine/processor.hpp>

#include <atomic>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace echo::engine {

enum class ProcState { deployed, running, paused, stopped };

std::string_view to_string(ProcState state);

struct InputPort {
    std::string edge_key;
    std::string source;///< upstream processor id
    std::shared_ptr<EdgeQueue> queue;
};

struct OutputPort {
    std::string edge_key;
    std::string target;///< downstream processor id
    std::shared_ptr<EdgeQueue> queue;
};

struct ProcessorCounters {
    std::atomic<std::uint64_t> in_batches{0};
    std::atomic<std::uint64_t> in_tuples{0};
    std::atomic<std::uint64_t> out_batches{0};
    std::atomic<std::uint64_t> out_tuples{0};
    std::atomic<std::uint64_t> errors{0};
};

/// One running processor: a thread that pulls from the input queues through
/// the input wrapper, calls the logic and pushes through the output wrapper.
///
/// Control calls may come from any thread. Pausing is cooperative: the thread
/// finishes the batch in hand, flushes its partial output window and parks.
class ProcessorInstance {
  public:
    ProcessorInstance(flow::ProcessorSpec spec, std::unique_ptr<ProcessorLogic> logic, ProcessorContext ctx,
                      bool start_paused = false);
    ~ProcessorInstance();

    ProcessorInstance(const ProcessorInstance&) = delete;
    ProcessorInstance& operator=(const ProcessorInstance&) = delete;

    const std::string& id() const noexcept { return spec_.id; }
    const flow::ProcessorSpec& spec() const noexcept { return spec_; }

    void set_inputs(std::vector<InputPort> inputs);
    void set_outputs(std::vector<OutputPort> outputs);
    std::vector<InputPort> inputs() const;
    std::vector<OutputPort> outputs() const;

    /// deployed -> running. Throws Conflict from any other state except running.
    void start();
    /// running -> paused; idempotent on paused. Waits up to `wait` for the
    /// thread to park and returns whether it did.
    bool pause(std::chrono::milliseconds wait = std::chrono::milliseconds(2000));
    /// paused -> running; idempotent on running.
    void resume();
    /// any -> stopped. Joins the thread.
    void stop();

    ProcState state() const;
    bool parked() const;
    bool finished() const noexcept { return finished_; }

    const ProcessorCounters& counters() const noexcept { return counters_; }
    nlohmann::json metrics() const;

  private:
    class Output;
    friend class Output;

    void run();
    bool step(Output& out);
    void process(const data::DataBatch& batch, Output& out);
    void close_out(Output& out);
    void wake();

    flow::ProcessorSpec spec_;
    std::unique_ptr<ProcessorLogic> logic_;
    ProcessorContext ctx_;
    data::WindowPolicy window_;
    std::string error_to_;
    double work_us_ = 0;
    double spin_us_ = 0;

    mutable std::mutex ports_mu_;
    std::vector<InputPort> inputs_;
    std::vector<OutputPort> outputs_;
    std::set<std::string> ended_inputs_;
    std::size_t rr_ = 0;

    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::condition_variable parked_cv_;
    ProcState state_ = ProcState::deployed;
    bool parked_ = false;
    bool woken_ = false;
    std::atomic<bool> finished_{false};
    std::atomic<bool> stopping_{false};

    ProcessorCounters counters_;
    std::thread thread_;
};

}// namespace echo::engine
