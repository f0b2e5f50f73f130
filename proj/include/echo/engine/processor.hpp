// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <echo/common/throttle.hpp>
#include <echo/databatch/batch.hpp>
#include <echo/databatch/tuple.hpp>
#include <echo/databatch/wrappers.hpp>
#include <echo/flowmodel/dataflow.hpp>

#include <json.hpp>

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>

namespace echo::engine {

/// Output side of a processor. Tuples are windowed into micro-batches by the
/// processor's output wrapper; batches and files go out as they are.
class Emitter {
  public:
    virtual ~Emitter() = default;
    virtual void emit_tuple(const data::EventTuple& tuple) = 0;
    virtual void emit_batch(const data::DataBatch& batch) = 0;
    /// Reads the file back as a batch and forwards it.
    virtual void emit_file(const data::FileRef& file) = 0;
    /// Routes to the processor's error edge when one is configured, else counts
    /// and drops.
    virtual void emit_error(const data::DataBatch& batch, const std::string& reason) = 0;
    /// Counts a dropped input item without emitting anything.
    virtual void count_error(const std::string& reason) = 0;
    /// Attributes of the input batch currently being processed (empty for sources).
    virtual const data::Attributes& input_attributes() const = 0;
};

struct ProcessorContext {
    std::string dataflow;
    std::string worker_id;
    std::string device;
    std::filesystem::path workdir;///< scratch space private to this processor
    Throttle* throttle = nullptr;
    /// Set when the processor is being stopped; long-running logic polls it.
    std::shared_ptr<std::atomic<bool>> cancel = std::make_shared<std::atomic<bool>>(false);
};

/// User logic of a processor. Input wrappers pick the entry point from the
/// declared input model: stream calls on_tuple, microbatch on_batch, file
/// on_file. The defaults convert downwards (file -> batch -> tuples), so a
/// logic that only implements on_tuple accepts every model.
class ProcessorLogic {
  public:
    virtual ~ProcessorLogic() = default;

    /// Sources have no inputs and are driven by poll().
    virtual bool is_source() const { return false; }
    /// Emits the next slice of source data. Returns false once exhausted.
    virtual bool poll(Emitter& out) { return false; }

    virtual void on_tuple(const data::EventTuple& tuple, Emitter& out);
    virtual void on_batch(const data::DataBatch& batch, Emitter& out);
    virtual void on_file(const data::FileRef& file, Emitter& out);
    /// Called roughly every 50 ms while running.
    virtual void on_tick(Emitter& out) {}
    /// Called once when every input has ended (or a source is exhausted).
    virtual void on_close(Emitter& out) {}

    /// Extra counters merged into the processor's metrics.
    virtual nlohmann::json stats() const { return nlohmann::json::object(); }
};

using LogicFactory = std::function<std::unique_ptr<ProcessorLogic>(const flow::ProcessorSpec&, const ProcessorContext&)>;

/// Maps processor kinds ("cep", "builtin:sink_file", ...) to factories.
class ProcessorRegistry {
  public:
    void add(const std::string& kind, LogicFactory factory);
    bool knows(const std::string& kind) const;
    /// Throws ValidationError naming the processor for an unknown kind, and
    /// lets factory errors propagate.
    std::unique_ptr<ProcessorLogic> create(const flow::ProcessorSpec& spec, const ProcessorContext& ctx) const;

  private:
    std::map<std::string, LogicFactory> factories_;
};

}// namespace echo::engine
