// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#include <echo/common/error.hpp>
#include <echo/engine/processor_runtime.hpp>

#include <spdlog/spdlog.h>

namespace echo::engine {

using data::DataBatch;
using Clock = std::chrono::steady_clock;

namespace {
constexpr auto kTick = std::chrono::milliseconds(50);
}

std::string_view to_string(ProcState state) {
    switch (state) {
        case ProcState::deployed: return "deployed";
        case ProcState::running: return "running";
        case ProcState::paused: return "paused";
        case ProcState::stopped: return "stopped";
    }
    return "stopped";
}

/// The output wrapper: windows tuples and fans batches out to every edge.
class ProcessorInstance::Output final : public Emitter {
  public:
    explicit Output(ProcessorInstance& owner) : owner_(owner), batcher_(owner.window_) {}

    void emit_tuple(const data::EventTuple& tuple) override {
        if (auto b = batcher_.push(tuple)) {
            send(*b, false);
        }
    }

    void emit_batch(const DataBatch& batch) override {
        flush();
        send(batch.restamped(), false);
    }

    void emit_file(const data::FileRef& file) override { emit_batch(data::file_to_batch(file)); }

    void emit_error(const DataBatch& batch, const std::string& reason) override {
        ++owner_.counters_.errors;
        spdlog::warn("processor {}: {}", owner_.spec_.id, reason);
        if (!owner_.error_to_.empty()) {
            send(batch.restamped().with_attributes({{"echo.error", reason}}), true);
        }
    }

    void count_error(const std::string& reason) override {
        ++owner_.counters_.errors;
        spdlog::debug("processor {}: {}", owner_.spec_.id, reason);
    }

    const data::Attributes& input_attributes() const override { return input_attrs_; }

    void set_input(const data::Attributes& attrs) { input_attrs_ = attrs; }
    void clear_input() { input_attrs_.clear(); }

    void tick() {
        if (auto b = batcher_.tick()) {
            send(*b, false);
        }
    }

    void flush() {
        if (auto b = batcher_.flush()) {
            send(*b, false);
        }
    }

    void close() {
        if (auto b = batcher_.close()) {
            send(*b, false);
        }
        send(DataBatch::end_of_stream(), false, true);
    }

  private:
    /// Blocks on full queues (backpressure) but gives up once the processor is
    /// being stopped.
    void send(const DataBatch& batch, bool error_route, bool all = false) {
        const auto ports = owner_.outputs();
        for (const auto& port : ports) {
            const bool is_error_port = !owner_.error_to_.empty() && port.target == owner_.error_to_;
            if (!all && is_error_port != error_route) {
                continue;
            }
            while (!port.queue->try_push_for(batch, std::chrono::milliseconds(100))) {
                if (owner_.stopping_ || port.queue->closed()) {
                    return;
                }
            }
        }
        if (!batch.is_eos()) {
            ++owner_.counters_.out_batches;
            owner_.counters_.out_tuples += batch.count();
        }
    }

    ProcessorInstance& owner_;
    data::StreamBatcher batcher_;
    data::Attributes input_attrs_;
};

ProcessorInstance::ProcessorInstance(flow::ProcessorSpec spec, std::unique_ptr<ProcessorLogic> logic, ProcessorContext ctx,
                                     bool start_paused)
    : spec_(std::move(spec)), logic_(std::move(logic)), ctx_(std::move(ctx)) {
    const auto& cfg = spec_.config;
    window_ = data::WindowPolicy::from_json(cfg.contains("window") ? cfg["window"] : nlohmann::json());
    error_to_ = cfg.value("error_to", std::string());
    work_us_ = cfg.value("work_us", 0.0);
    spin_us_ = cfg.value("spin_us", 0.0);
    if (start_paused) {
        state_ = ProcState::paused;
    }
    thread_ = std::thread([this] { run(); });
}

ProcessorInstance::~ProcessorInstance() { stop(); }

void ProcessorInstance::set_inputs(std::vector<InputPort> inputs) {
    {
        std::lock_guard lock(ports_mu_);
        for (auto& in : inputs) {
            in.queue->set_listener([this] { wake(); });
        }
        inputs_ = std::move(inputs);
    }
    wake();
}

void ProcessorInstance::set_outputs(std::vector<OutputPort> outputs) {
    std::lock_guard lock(ports_mu_);
    outputs_ = std::move(outputs);
}

std::vector<InputPort> ProcessorInstance::inputs() const {
    std::lock_guard lock(ports_mu_);
    return inputs_;
}

std::vector<OutputPort> ProcessorInstance::outputs() const {
    std::lock_guard lock(ports_mu_);
    return outputs_;
}

void ProcessorInstance::start() {
    {
        std::lock_guard lock(mu_);
        if (state_ == ProcState::running) {
            return;
        }
        if (state_ != ProcState::deployed) {
            throw Conflict("processor " + spec_.id + " cannot start from state " + std::string(to_string(state_)));
        }
        state_ = ProcState::running;
    }
    cv_.notify_all();
}

bool ProcessorInstance::pause(std::chrono::milliseconds wait) {
    std::unique_lock lock(mu_);
    if (state_ == ProcState::running) {
        state_ = ProcState::paused;
        cv_.notify_all();
    } else if (state_ != ProcState::paused) {
        throw Conflict("processor " + spec_.id + " cannot pause from state " + std::string(to_string(state_)));
    }
    return parked_cv_.wait_for(lock, wait, [&] { return parked_ || state_ != ProcState::paused; });
}

void ProcessorInstance::resume() {
    {
        std::lock_guard lock(mu_);
        if (state_ == ProcState::running) {
            return;
        }
        if (state_ != ProcState::paused) {
            throw Conflict("processor " + spec_.id + " cannot resume from state " + std::string(to_string(state_)));
        }
        state_ = ProcState::running;
    }
    cv_.notify_all();
}

void ProcessorInstance::stop() {
    {
        std::lock_guard lock(mu_);
        state_ = ProcState::stopped;
        stopping_ = true;
    }
    if (ctx_.cancel) {
        *ctx_.cancel = true;
    }
    cv_.notify_all();
    parked_cv_.notify_all();
    if (thread_.joinable() && thread_.get_id() != std::this_thread::get_id()) {
        thread_.join();
    }
}

ProcState ProcessorInstance::state() const {
    std::lock_guard lock(mu_);
    return state_;
}

bool ProcessorInstance::parked() const {
    std::lock_guard lock(mu_);
    return parked_;
}

void ProcessorInstance::wake() {
    {
        std::lock_guard lock(mu_);
        woken_ = true;
    }
    cv_.notify_all();
}

nlohmann::json ProcessorInstance::metrics() const {
    nlohmann::json doc{{"state", to_string(state())},
                       {"parked", parked()},
                       {"finished", finished()},
                       {"kind", spec_.kind},
                       {"in_batches", counters_.in_batches.load()},
                       {"in_tuples", counters_.in_tuples.load()},
                       {"out_batches", counters_.out_batches.load()},
                       {"out_tuples", counters_.out_tuples.load()},
                       {"errors", counters_.errors.load()}};
    doc["logic"] = logic_->stats();
    return doc;
}

void ProcessorInstance::run() {
    Output out(*this);
    auto last_tick = Clock::now();
    while (true) {
        {
            std::unique_lock lock(mu_);
            if (state_ == ProcState::stopped) {
                break;
            }
            if (state_ == ProcState::deployed) {
                cv_.wait(lock, [&] { return state_ != ProcState::deployed; });
                continue;
            }
            if (state_ == ProcState::paused) {
                if (!parked_) {
                    lock.unlock();
                    out.flush();
                    lock.lock();
                    if (state_ != ProcState::paused) {
                        continue;
                    }
                    parked_ = true;
                    parked_cv_.notify_all();
                }
                cv_.wait(lock, [&] { return state_ != ProcState::paused; });
                parked_ = false;
                continue;
            }
        }
        bool busy = false;
        try {
            busy = step(out);
        } catch (const std::exception& e) {
            out.count_error(e.what());
            spdlog::warn("processor {}: {}", spec_.id, e.what());
        }
        const auto now = Clock::now();
        if (now - last_tick >= kTick) {
            last_tick = now;
            try {
                logic_->on_tick(out);
                out.tick();
            } catch (const std::exception& e) {
                out.count_error(e.what());
            }
        }
        if (!busy) {
            std::unique_lock lock(mu_);
            cv_.wait_for(lock, kTick, [&] { return woken_ || state_ != ProcState::running; });
            woken_ = false;
        }
    }
}

bool ProcessorInstance::step(Output& out) {
    if (finished_) {
        return false;
    }
    if (logic_->is_source()) {
        out.clear_input();
        if (!logic_->poll(out)) {
            close_out(out);
        }
        return true;
    }
    std::optional<DataBatch> batch;
    std::string from_key;
    bool all_ended = false;
    {
        std::lock_guard lock(ports_mu_);
        const auto n = inputs_.size();
        for (std::size_t i = 0; i < n && !batch; ++i) {
            const auto& port = inputs_[(rr_ + i) % n];
            if (auto b = port.queue->try_pop()) {
                batch = std::move(b);
                from_key = port.edge_key;
                rr_ = (rr_ + i + 1) % n;
            }
        }
        if (batch && batch->is_eos()) {
            ended_inputs_.insert(from_key);
            std::size_t live = 0;
            std::size_t ended = 0;
            for (const auto& port : inputs_) {
                if (port.source == spec_.id) {
                    continue;
                }
                ++live;
                ended += ended_inputs_.contains(port.edge_key) ? 1 : 0;
            }
            all_ended = live > 0 && ended == live;
        }
    }
    if (!batch) {
        return false;
    }
    if (batch->is_eos()) {
        if (all_ended) {
            close_out(out);
        }
        return true;
    }
    process(*batch, out);
    return true;
}

void ProcessorInstance::process(const DataBatch& batch, Output& out) {
    ++counters_.in_batches;
    counters_.in_tuples += batch.count();
    const double units = static_cast<double>(std::max<std::uint64_t>(batch.count(), 1));
    if (ctx_.throttle && work_us_ > 0) {
        ctx_.throttle->charge(work_us_ * units);
    }
    if (spin_us_ > 0) {
        const auto until = Clock::now() + std::chrono::microseconds(static_cast<std::int64_t>(spin_us_ * units));
        while (Clock::now() < until) {
        }
    }
    out.set_input(batch.attributes());
    try {
        switch (spec_.input_model) {
            case flow::DataModel::stream:
                for (const auto& t : data::batch_to_stream(batch)) {
                    logic_->on_tuple(t, out);
                }
                break;
            case flow::DataModel::microbatch: logic_->on_batch(batch, out); break;
            case flow::DataModel::file: {
                const auto ref = data::batch_to_file(batch, ctx_.workdir);
                try {
                    logic_->on_file(ref, out);
                } catch (...) {
                    data::remove_batch_file(ref.path);
                    throw;
                }
                data::remove_batch_file(ref.path);
                break;
            }
        }
    } catch (const std::exception& e) {
        out.count_error(e.what());
    }
    out.clear_input();
}

void ProcessorInstance::close_out(Output& out) {
    try {
        logic_->on_close(out);
    } catch (const std::exception& e) {
        out.count_error(e.what());
    }
    out.close();
    finished_ = true;
    spdlog::info("processor {}: end of stream ({} tuples in, {} out)", spec_.id, counters_.in_tuples.load(),
                 counters_.out_tuples.load());
}

}// namespace echo::engine
