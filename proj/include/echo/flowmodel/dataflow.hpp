// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace echo::flow {

enum class DataModel { stream, microbatch, file };

std::string_view to_string(DataModel model);
std::optional<DataModel> parse_data_model(std::string_view text);

struct ResourceDemand {
    std::int64_t cpu_millis = 0;
    std::int64_t mem_mb = 0;

    bool operator==(const ResourceDemand&) const = default;
};

struct ProcessorSpec {
    std::string id;
    std::string kind;///< "builtin:<name>", "cep", "exec" or "bridge"
    DataModel input_model = DataModel::microbatch;
    DataModel output_model = DataModel::microbatch;
    nlohmann::json config = nlohmann::json::object();
    ResourceDemand demands;
    std::vector<std::string> constraints;

    bool operator==(const ProcessorSpec&) const = default;
};

struct EdgeSpec {
    std::string from;
    std::string to;

    bool operator==(const EdgeSpec&) const = default;
};

struct DataflowSpec {
    std::string name;
    std::vector<ProcessorSpec> processors;
    std::vector<EdgeSpec> edges;
    std::map<std::string, std::string> qos;

    const ProcessorSpec* find(std::string_view id) const;
    std::vector<std::string> processor_ids() const;

    bool operator==(const DataflowSpec&) const = default;
};

struct ValidationReport {
    std::vector<std::string> violations;
    std::vector<std::string> warnings;

    bool ok() const noexcept { return violations.empty(); }
};

/// Structural checks: unique ids, dangling edges, non-negative demands, at
/// least one source. Unknown processor kinds are left to the engine.
ValidationReport validate(const DataflowSpec& spec);

nlohmann::json to_json(const DataflowSpec& spec);
nlohmann::json to_json(const ProcessorSpec& proc);
ProcessorSpec processor_from_json(const nlohmann::json& doc, std::vector<std::string>& violations);

/// Decodes without the structural checks. Throws ValidationError listing every
/// schema violation.
DataflowSpec dataflow_from_json(const nlohmann::json& doc);

/// JSON text to validated spec. Throws ParseError on a syntax error and
/// ValidationError (all violations) otherwise.
DataflowSpec parse_and_validate(std::string_view text);

/// Stable key per edge: "from->to", suffixed "#k" for the k-th repeat.
std::vector<std::string> edge_keys(const DataflowSpec& spec);

/// Topological order with cycles broken at the lexicographically smallest
/// remaining id; ties always resolve to the smallest ready id.
std::vector<std::string> topological_order(const DataflowSpec& spec);

}// namespace echo::flow
