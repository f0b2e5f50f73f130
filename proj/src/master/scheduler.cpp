// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#include <echo/common/error.hpp>
#include <echo/master/scheduler.hpp>

#include <algorithm>

namespace echo::master {

using flow::DataflowSpec;
using flow::PlacementMapping;
using flow::ProcessorSpec;

bool satisfies_tags(const ProcessorSpec& proc, const WorkerView& worker) {
    return std::all_of(proc.constraints.begin(), proc.constraints.end(),
                       [&](const std::string& tag) { return worker.tags.contains(tag); });
}

namespace {

std::string describe(const ProcessorSpec& p) {
    std::string tags;
    for (const auto& t : p.constraints) {
        tags += (tags.empty() ? "" : ",") + t;
    }
    return "processor " + p.id + " (" + std::to_string(p.demands.cpu_millis) + "m, " + std::to_string(p.demands.mem_mb) + "MB" +
           (tags.empty() ? "" : ", tags " + tags) + ")";
}

}// namespace

PlacementMapping FirstFitScheduler::schedule(const DataflowSpec& spec, const ResourceView& view,
                                             const PlacementMapping* current) const {
    if (view.workers.empty()) {
        throw Conflict("infeasible: no live workers");
    }
    const auto prefer = spec.qos.contains("prefer_class") ? spec.qos.at("prefer_class") : std::string();
    std::vector<WorkerView> order = view.workers;
    std::stable_sort(order.begin(), order.end(), [&](const WorkerView& a, const WorkerView& b) {
        const auto rank = [&](const WorkerView& w) {
            return std::make_tuple(prefer.empty() ? 0 : (w.device_class == prefer ? 0 : 1), w.device_class == "cloud" ? 1 : 0);
        };
        return std::make_tuple(rank(a), a.id) < std::make_tuple(rank(b), b.id);
    });

    std::map<std::string, std::pair<std::int64_t, std::int64_t>> free;
    for (const auto& w : order) {
        free[w.id] = {w.free_cpu(), w.free_mem()};
    }
    const auto fits = [&](const ProcessorSpec& p, const WorkerView& w) {
        const auto& [cpu, mem] = free[w.id];
        return cpu >= p.demands.cpu_millis && mem >= p.demands.mem_mb && satisfies_tags(p, w);
    };

    PlacementMapping mapping;
    for (const auto& id : flow::topological_order(spec)) {
        const auto& p = *spec.find(id);
        const WorkerView* chosen = nullptr;
        if (current) {
            const auto it = current->assignments.find(id);
            if (it != current->assignments.end()) {
                const auto* w = view.find(it->second);
                if (w && fits(p, *w) && (prefer.empty() || w->device_class == prefer)) {
                    chosen = w;
                }
            }
        }
        for (std::size_t i = 0; !chosen && i < order.size(); ++i) {
            if (fits(p, order[i])) {
                chosen = &order[i];
            }
        }
        if (!chosen) {
            const bool tag_missing = std::none_of(order.begin(), order.end(), [&](const WorkerView& w) { return satisfies_tags(p, w); });
            throw Conflict("infeasible: " + describe(p) + (tag_missing ? " needs tags no live worker offers" : " fits no worker"));
        }
        mapping.assignments[id] = chosen->id;
        free[chosen->id].first -= p.demands.cpu_millis;
        free[chosen->id].second -= p.demands.mem_mb;
    }
    return mapping;
}

std::unique_ptr<SchedulerPlugin> make_scheduler(const std::string& name) {
    if (name == "firstfit" || name.empty()) {
        return std::make_unique<FirstFitScheduler>();
    }
    throw ValidationError("unknown scheduler '" + name + "'");
}

std::vector<std::string> validate_schedule(const DataflowSpec& spec, const ResourceView& view, const PlacementMapping& mapping) {
    std::vector<std::string> violations;
    std::map<std::string, std::pair<std::int64_t, std::int64_t>> used;
    for (const auto& p : spec.processors) {
        const auto it = mapping.assignments.find(p.id);
        if (it == mapping.assignments.end()) {
            violations.push_back("processor " + p.id + " is unplaced");
            continue;
        }
        const auto* w = view.find(it->second);
        if (!w) {
            violations.push_back("processor " + p.id + " placed on unknown worker " + it->second);
            continue;
        }
        if (!satisfies_tags(p, *w)) {
            violations.push_back("processor " + p.id + " lacks required tags on " + w->id);
        }
        used[w->id].first += p.demands.cpu_millis;
        used[w->id].second += p.demands.mem_mb;
    }
    if (mapping.assignments.size() != spec.processors.size()) {
        violations.push_back("mapping names processors outside the dataflow");
    }
    for (const auto& [wid, u] : used) {
        const auto* w = view.find(wid);
        if (u.first > w->free_cpu()) {
            violations.push_back("worker " + wid + " cpu over capacity: " + std::to_string(u.first) + "m > " + std::to_string(w->free_cpu()) + "m");
        }
        if (u.second > w->free_mem()) {
            violations.push_back("worker " + wid + " memory over capacity: " + std::to_string(u.second) + "MB > " +
                                 std::to_string(w->free_mem()) + "MB");
        }
    }
    return violations;
}

}// namespace echo::master
