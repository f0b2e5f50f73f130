// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <echo/flowmodel/dataflow.hpp>
#include <echo/flowmodel/partition.hpp>
#include <echo/master/resource_view.hpp>

#include <memory>
#include <string>
#include <vector>

namespace echo::master {

/// Placement plugin. Implementations throw Conflict("infeasible: ...") when no
/// mapping is found; returned mappings must be total and sound.
class SchedulerPlugin {
  public:
    virtual ~SchedulerPlugin() = default;
    virtual std::string name() const = 0;
    virtual flow::PlacementMapping schedule(const flow::DataflowSpec& spec, const ResourceView& view,
                                            const flow::PlacementMapping* current) const = 0;
};

/// Processors in topological order, each on the first worker with enough free
/// capacity and the required tags. Workers are ordered class-cloud last, then
/// by id; a "prefer_class" QoS entry moves that class to the front. With a
/// current mapping a processor keeps its worker while that remains feasible
/// (and, under prefer_class, is of the preferred class).
class FirstFitScheduler final : public SchedulerPlugin {
  public:
    std::string name() const override { return "firstfit"; }
    flow::PlacementMapping schedule(const flow::DataflowSpec& spec, const ResourceView& view,
                                    const flow::PlacementMapping* current) const override;
};

/// Throws ValidationError for an unknown name.
std::unique_ptr<SchedulerPlugin> make_scheduler(const std::string& name);

/// Capacity, tag and totality check applied to every schedule. Returns the
/// violations (empty when sound).
std::vector<std::string> validate_schedule(const flow::DataflowSpec& spec, const ResourceView& view,
                                           const flow::PlacementMapping& mapping);

/// Whether `worker` satisfies every constraint tag of `proc`.
bool satisfies_tags(const flow::ProcessorSpec& proc, const WorkerView& worker);

}// namespace echo::master
