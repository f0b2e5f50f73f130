// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

// Reference implementations used as test oracles, plus random instance
// generators. The oracles are written as plain set comprehensions and brute
// force, independent of the production algorithms.

#pragma once

#include <echo/databatch/tuple.hpp>
#include <echo/flowmodel/dataflow.hpp>
#include <echo/flowmodel/partition.hpp>
#include <echo/master/resource_view.hpp>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace echo::testing {

inline std::string pid(std::size_t i) {
    return "p" + std::to_string(i);
}

/// A random graph over `n` processors. Self-loops, cycles and repeated edges
/// may appear; p0 never has an incoming edge so the graph always has a source.
inline flow::DataflowSpec random_graph(std::mt19937& rng, std::size_t n, std::size_t max_edges) {
    flow::DataflowSpec spec;
    spec.name = "g";
    for (std::size_t i = 0; i < n; ++i) {
        flow::ProcessorSpec p;
        p.id = pid(i);
        p.kind = "builtin:identity";
        spec.processors.push_back(p);
    }
    std::uniform_int_distribution<std::size_t> node(0, n - 1);
    std::uniform_int_distribution<std::size_t> count(0, max_edges);
    const auto m = count(rng);
    for (std::size_t e = 0; e < m; ++e) {
        const auto to = node(rng);
        if (to == 0) {
            continue;
        }
        spec.edges.push_back({pid(node(rng)), pid(to)});
    }
    return spec;
}

inline flow::PlacementMapping random_mapping(std::mt19937& rng, const flow::DataflowSpec& spec, std::size_t resources) {
    std::uniform_int_distribution<std::size_t> r(0, resources - 1);
    flow::PlacementMapping m;
    for (const auto& p : spec.processors) {
        m.assignments[p.id] = "r" + std::to_string(r(rng));
    }
    return m;
}

using EdgeTuple = std::tuple<std::string, std::string>;

/// Cut edges by direct filter over the edge list.
inline std::multiset<EdgeTuple> oracle_cut(const flow::DataflowSpec& spec, const flow::PlacementMapping& m) {
    std::multiset<EdgeTuple> out;
    for (const auto& e : spec.edges) {
        if (m.assignments.at(e.from) != m.assignments.at(e.to)) {
            out.insert({e.from, e.to});
        }
    }
    return out;
}

/// {p : old[p] != new[p]} and that set plus its graph neighbours.
inline flow::MigrationSet oracle_diff(const flow::DataflowSpec& spec, const flow::PlacementMapping& a,
                                      const flow::PlacementMapping& b) {
    flow::MigrationSet out;
    for (const auto& p : spec.processors) {
        if (a.assignments.at(p.id) != b.assignments.at(p.id)) {
            out.moved.insert(p.id);
        }
    }
    out.affected = out.moved;
    for (const auto& e : spec.edges) {
        if (out.moved.contains(e.from) || out.moved.contains(e.to)) {
            out.affected.insert(e.from);
            out.affected.insert(e.to);
        }
    }
    return out;
}

/// Capacity and tag check written independently of validate_schedule.
inline bool oracle_sound(const flow::DataflowSpec& spec, const master::ResourceView& view, const flow::PlacementMapping& m) {
    std::map<std::string, std::pair<std::int64_t, std::int64_t>> used;
    for (const auto& p : spec.processors) {
        const auto it = m.assignments.find(p.id);
        if (it == m.assignments.end()) {
            return false;
        }
        const auto* w = view.find(it->second);
        if (!w) {
            return false;
        }
        for (const auto& tag : p.constraints) {
            if (!w->tags.contains(tag)) {
                return false;
            }
        }
        used[w->id].first += p.demands.cpu_millis;
        used[w->id].second += p.demands.mem_mb;
    }
    for (const auto& w : view.workers) {
        const auto& [cpu, mem] = used[w.id];
        if (cpu > w.free_cpu() || mem > w.free_mem()) {
            return false;
        }
    }
    return m.assignments.size() == spec.processors.size();
}

/// Enumerates every mapping (workers^processors) and returns the first sound
/// one, if any.
inline std::optional<flow::PlacementMapping> exhaustive_schedule(const flow::DataflowSpec& spec, const master::ResourceView& view) {
    const auto n = spec.processors.size();
    const auto k = view.workers.size();
    if (k == 0) {
        return std::nullopt;
    }
    std::vector<std::size_t> digits(n, 0);
    while (true) {
        flow::PlacementMapping m;
        for (std::size_t i = 0; i < n; ++i) {
            m.assignments[spec.processors[i].id] = view.workers[digits[i]].id;
        }
        if (oracle_sound(spec, view, m)) {
            return m;
        }
        std::size_t i = 0;
        while (i < n && ++digits[i] == k) {
            digits[i++] = 0;
        }
        if (i == n) {
            return std::nullopt;
        }
    }
}

inline std::vector<data::EventTuple> random_tuples(std::mt19937& rng, std::size_t n) {
    static const char* kNames[] = {"temperature", "humidity", "light", "dust", "airquality_raw"};
    static const char* kUnits[] = {"Cel", "%RH", "lx", "", "ppm"};
    std::uniform_int_distribution<int> pick(0, 4);
    std::uniform_real_distribution<double> value(-1e6, 1e6);
    std::uniform_int_distribution<std::int64_t> ts(0, 4'000'000'000'000);
    std::vector<data::EventTuple> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int k = pick(rng);
        out.push_back({kNames[k], value(rng), kUnits[k], ts(rng)});
    }
    return out;
}

}// namespace echo::testing
