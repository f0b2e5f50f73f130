// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#include <echo/common/error.hpp>
#include <echo/engine/processor.hpp>

namespace echo::engine {

void ProcessorLogic::on_tuple(const data::EventTuple&, Emitter&) {
    throw ValidationError("processor does not consume tuples");
}

void ProcessorLogic::on_batch(const data::DataBatch& batch, Emitter& out) {
    for (const auto& t : data::batch_to_stream(batch)) {
        on_tuple(t, out);
    }
}

void ProcessorLogic::on_file(const data::FileRef& file, Emitter& out) { on_batch(data::file_to_batch(file), out); }

void ProcessorRegistry::add(const std::string& kind, LogicFactory factory) { factories_[kind] = std::move(factory); }

bool ProcessorRegistry::knows(const std::string& kind) const { return factories_.contains(kind); }

std::unique_ptr<ProcessorLogic> ProcessorRegistry::create(const flow::ProcessorSpec& spec, const ProcessorContext& ctx) const {
    const auto it = factories_.find(spec.kind);
    if (it == factories_.end()) {
        throw ValidationError("processor " + spec.id + " has unknown kind " + spec.kind);
    }
    try {
        return it->second(spec, ctx);
    } catch (const ValidationError& e) {
        throw ValidationError("processor " + spec.id + ": " + e.what());
    } catch (const IoError& e) {
        throw ValidationError("processor " + spec.id + ": " + e.what());
    }
}

}// namespace echo::engine
