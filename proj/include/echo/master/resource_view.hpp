// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <echo/catalog/catalog_client.hpp>
#include <echo/flowmodel/partition.hpp>

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace echo::master {

struct WorkerView {
    std::string id;
    std::string device;
    std::string device_class = "edge";
    std::int64_t cpu_millis = 0;
    std::int64_t mem_mb = 0;
    std::int64_t allotted_cpu = 0;///< demands of processors already placed here
    std::int64_t allotted_mem = 0;
    std::set<std::string> tags;///< device tags plus the device class
    std::set<std::string> reachable_from{"*"};
    std::string endpoint;
    std::string profile;

    std::int64_t free_cpu() const noexcept { return cpu_millis - allotted_cpu; }
    std::int64_t free_mem() const noexcept { return mem_mb - allotted_mem; }
};

/// Schedulable workers as the catalog sees them right now.
struct ResourceView {
    std::vector<WorkerView> workers;///< sorted by id

    const WorkerView* find(const std::string& id) const;
    flow::Reachability reachability() const;
    std::map<std::string, std::string> endpoints() const;

    /// Live (up, not stale) workers with allotments summed over the mappings of
    /// every active dataflow except `exclude_dataflow`.
    static ResourceView load(const catalog::CatalogClient& catalog, const std::string& exclude_dataflow = {});
};

}// namespace echo::master
