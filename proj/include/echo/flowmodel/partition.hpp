// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <echo/flowmodel/dataflow.hpp>

#include <map>
#include <set>
#include <string>
#include <vector>

namespace echo::flow {

struct PlacementMapping {
    std::map<std::string, std::string> assignments;///< processor id -> resource id

    const std::string& at(const std::string& processor) const;
    std::set<std::string> resources() const;

    bool operator==(const PlacementMapping&) const = default;
};

nlohmann::json to_json(const PlacementMapping& mapping);
PlacementMapping mapping_from_json(const nlohmann::json& doc);

/// Throws ValidationError unless `mapping` assigns exactly the processors of `spec`.
void require_total(const DataflowSpec& spec, const PlacementMapping& mapping);

/// Who may open connections to whom. A resource without an entry accepts
/// everyone; otherwise it accepts callers named in its set (by resource or
/// device id), or everyone when the set holds "*". Resources on the same
/// device always reach each other.
class Reachability {
  public:
    void accept_from(const std::string& resource, std::set<std::string> callers);
    void set_device(const std::string& resource, const std::string& device);

    bool can_connect(const std::string& from, const std::string& to) const;

  private:
    std::map<std::string, std::set<std::string>> accept_;
    std::map<std::string, std::string> device_;
};

enum class LinkDirection { push, pull };

std::string_view to_string(LinkDirection dir);
LinkDirection parse_direction(std::string_view text);

struct CutEdge {
    std::string key;///< edge key, see edge_keys()
    std::string from;
    std::string to;
    std::string from_resource;
    std::string to_resource;
    LinkDirection direction = LinkDirection::push;
    std::string link_id;

    bool operator==(const CutEdge&) const = default;
};

struct InternalEdge {
    std::string key;
    std::string from;
    std::string to;

    bool operator==(const InternalEdge&) const = default;
};

struct Fragment {
    std::string resource;
    std::set<std::string> processors;
    std::vector<InternalEdge> internal_edges;
    std::vector<CutEdge> cut_edges;///< every cut edge touching this resource
};

struct FragmentPlan {
    std::map<std::string, Fragment> fragments;///< keyed by resource
    std::vector<CutEdge> cut_edges;
    std::vector<std::string> warnings;
};

/// Partitions `spec` by `mapping`. Cut edges get push when the upstream
/// resource can connect downstream, else pull, else the edge is unschedulable
/// (ValidationError naming it). Cut edges lying on a cycle add a warning.
FragmentPlan edge_cut(const DataflowSpec& spec, const PlacementMapping& mapping, const Reachability& reach,
                      const std::string& dataflow_id);

/// "<dataflow>-<from>-<to>", with "-k" for the k-th repeat of an edge.
std::string link_id(const std::string& dataflow_id, const std::string& edge_key);

struct MigrationSet {
    std::set<std::string> moved;
    std::set<std::string> affected;///< moved plus their graph neighbours

    bool operator==(const MigrationSet&) const = default;
};

MigrationSet graph_diff(const DataflowSpec& spec, const PlacementMapping& old_mapping, const PlacementMapping& new_mapping);

nlohmann::json to_json(const FragmentPlan& plan);

/// What an engine needs to host one fragment.
struct LinkDesc {
    std::string id;
    std::string edge_key;
    LinkDirection direction = LinkDirection::push;
    bool outbound = true;///< this side holds the upstream processor
    std::string local_processor;
    std::string remote_processor;
    std::string peer_url;///< engine URL on the other side

    bool operator==(const LinkDesc&) const = default;
};

struct FragmentDescriptor {
    std::string dataflow;
    std::string resource;
    std::vector<ProcessorSpec> processors;
    std::vector<InternalEdge> edges;
    std::vector<LinkDesc> links;
    std::set<std::string> paused;///< processors that start (or are added) paused

    bool operator==(const FragmentDescriptor&) const = default;
};

nlohmann::json to_json(const FragmentDescriptor& desc);
FragmentDescriptor descriptor_from_json(const nlohmann::json& doc);

/// One descriptor per fragment of `plan`. `endpoints` maps resource to engine URL.
std::map<std::string, FragmentDescriptor> build_descriptors(const DataflowSpec& spec, const FragmentPlan& plan,
                                                            const std::string& dataflow_id,
                                                            const std::map<std::string, std::string>& endpoints);

}// namespace echo::flow
