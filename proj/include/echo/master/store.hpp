// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <echo/catalog/catalog_client.hpp>
#include <echo/flowmodel/dataflow.hpp>
#include <echo/flowmodel/partition.hpp>

#include <json.hpp>

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace echo::master {

/// Relation holding a JSON document in the spec/mapping/plan/fragments items.
inline constexpr std::string_view kJsonRel = "urn:echo:rel:json";

enum class FlowState { scheduling, deploying, running, rebalancing, stopping, stopped, failed };

std::string_view to_string(FlowState s);
FlowState parse_flow_state(std::string_view text);

/// Everything known about one dataflow, kept under /dataflow/<uuid>.
struct DataflowRecord {
    std::string uuid;
    flow::DataflowSpec spec;
    FlowState state = FlowState::scheduling;
    std::vector<std::pair<std::string, std::string>> transitions;///< (state, iso time)
    std::vector<std::string> warnings;
    flow::PlacementMapping mapping;
    nlohmann::json plan = nlohmann::json::object();
    std::map<std::string, flow::FragmentDescriptor> fragments;///< by resource
    std::map<std::string, std::string> endpoints;///< resource -> engine URL
    int rebalances = 0;

    void transition(FlowState next);
    nlohmann::json to_json() const;
};

/// Reads and writes dataflow records in the catalog. Holds no state itself.
class RecordStore {
  public:
    explicit RecordStore(const catalog::CatalogClient& catalog) : catalog_(catalog) {}

    /// Writes the record's items (top-level item last).
    void save(const DataflowRecord& record) const;
    /// Throws NotFound.
    DataflowRecord load(const std::string& uuid) const;
    std::vector<std::string> list() const;

    /// Advisory per-dataflow lock with a TTL. Throws Conflict when held.
    void lock(const std::string& uuid, const std::string& owner, std::chrono::milliseconds ttl) const;
    void unlock(const std::string& uuid) const;

  private:
    const catalog::CatalogClient& catalog_;
};

/// Holds the lock for a scope.
class RecordLock {
  public:
    RecordLock(const RecordStore& store, std::string uuid, const std::string& owner, std::chrono::milliseconds ttl);
    ~RecordLock();
    RecordLock(const RecordLock&) = delete;
    RecordLock& operator=(const RecordLock&) = delete;

  private:
    const RecordStore& store_;
    std::string uuid_;
};

}// namespace echo::master
