// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#include <echo/common/error.hpp>
#include <echo/flowmodel/partition.hpp>

#include <functional>

namespace echo::flow {

using Json = nlohmann::json;

const std::string& PlacementMapping::at(const std::string& processor) const {
    const auto it = assignments.find(processor);
    if (it == assignments.end()) {
        throw ValidationError("processor " + processor + " has no resource");
    }
    return it->second;
}

std::set<std::string> PlacementMapping::resources() const {
    std::set<std::string> out;
    for (const auto& [p, r] : assignments) {
        out.insert(r);
    }
    return out;
}

Json to_json(const PlacementMapping& mapping) {
    Json doc = Json::object();
    for (const auto& [p, r] : mapping.assignments) {
        doc[p] = r;
    }
    return doc;
}

PlacementMapping mapping_from_json(const Json& doc) {
    if (!doc.is_object()) {
        throw ParseError("mapping must be an object of processor -> resource");
    }
    PlacementMapping m;
    for (const auto& [p, r] : doc.items()) {
        if (!r.is_string()) {
            throw ParseError("mapping value for " + p + " must be a string");
        }
        m.assignments[p] = r.get<std::string>();
    }
    return m;
}

void require_total(const DataflowSpec& spec, const PlacementMapping& mapping) {
    std::vector<std::string> violations;
    for (const auto& p : spec.processors) {
        if (!mapping.assignments.contains(p.id)) {
            violations.push_back("processor " + p.id + " has no resource");
        }
    }
    for (const auto& [p, r] : mapping.assignments) {
        if (!spec.find(p)) {
            violations.push_back("mapping names unknown processor " + p);
        }
    }
    if (!violations.empty()) {
        throw ValidationError(std::move(violations));
    }
}

void Reachability::accept_from(const std::string& resource, std::set<std::string> callers) {
    accept_[resource] = std::move(callers);
}

void Reachability::set_device(const std::string& resource, const std::string& device) { device_[resource] = device; }

bool Reachability::can_connect(const std::string& from, const std::string& to) const {
    if (from == to) {
        return true;
    }
    const auto dev_from = device_.find(from);
    const auto dev_to = device_.find(to);
    if (dev_from != device_.end() && dev_to != device_.end() && dev_from->second == dev_to->second) {
        return true;
    }
    const auto it = accept_.find(to);
    if (it == accept_.end() || it->second.contains("*") || it->second.contains(from)) {
        return true;
    }
    return dev_from != device_.end() && it->second.contains(dev_from->second);
}

std::string_view to_string(LinkDirection dir) { return dir == LinkDirection::push ? "push" : "pull"; }

LinkDirection parse_direction(std::string_view text) {
    if (text == "push") {
        return LinkDirection::push;
    }
    if (text == "pull") {
        return LinkDirection::pull;
    }
    throw ParseError("link direction must be push or pull, got '" + std::string(text) + "'");
}

std::string link_id(const std::string& dataflow_id, const std::string& edge_key) {
    std::string id = dataflow_id + "-";
    for (std::size_t i = 0; i < edge_key.size(); ++i) {
        if (edge_key.compare(i, 2, "->") == 0) {
            id += '-';
            ++i;
        } else if (edge_key[i] == '#') {
            id += '-';
        } else {
            id += edge_key[i];
        }
    }
    return id;
}

namespace {

/// Strongly connected component index per node (Tarjan).
std::map<std::string, int> scc_index(const DataflowSpec& spec) {
    std::map<std::string, std::vector<std::string>> adj;
    for (const auto& e : spec.edges) {
        adj[e.from].push_back(e.to);
    }
    std::map<std::string, int> index, low, comp;
    std::vector<std::string> stack;
    std::set<std::string> on_stack;
    int counter = 0;
    int components = 0;
    std::function<void(const std::string&)> visit = [&](const std::string& v) {
        index[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack.insert(v);
        for (const auto& w : adj[v]) {
            if (!index.contains(w)) {
                visit(w);
                low[v] = std::min(low[v], low[w]);
            } else if (on_stack.contains(w)) {
                low[v] = std::min(low[v], index[w]);
            }
        }
        if (low[v] == index[v]) {
            std::string w;
            do {
                w = stack.back();
                stack.pop_back();
                on_stack.erase(w);
                comp[w] = components;
            } while (w != v);
            ++components;
        }
    };
    for (const auto& p : spec.processors) {
        if (!index.contains(p.id)) {
            visit(p.id);
        }
    }
    return comp;
}

}// namespace

FragmentPlan edge_cut(const DataflowSpec& spec, const PlacementMapping& mapping, const Reachability& reach,
                      const std::string& dataflow_id) {
    require_total(spec, mapping);
    FragmentPlan plan;
    for (const auto& p : spec.processors) {
        const auto& r = mapping.at(p.id);
        auto& frag = plan.fragments[r];
        frag.resource = r;
        frag.processors.insert(p.id);
    }
    const auto keys = edge_keys(spec);
    std::map<std::string, int> comp;
    std::vector<std::string> unschedulable;
    for (std::size_t i = 0; i < spec.edges.size(); ++i) {
        const auto& e = spec.edges[i];
        const auto& ru = mapping.at(e.from);
        const auto& rv = mapping.at(e.to);
        if (ru == rv) {
            plan.fragments[ru].internal_edges.push_back({keys[i], e.from, e.to});
            continue;
        }
        CutEdge cut{keys[i], e.from, e.to, ru, rv, LinkDirection::push, link_id(dataflow_id, keys[i])};
        if (reach.can_connect(ru, rv)) {
            cut.direction = LinkDirection::push;
        } else if (reach.can_connect(rv, ru)) {
            cut.direction = LinkDirection::pull;
        } else {
            unschedulable.push_back("unschedulable link " + keys[i] + ": neither " + ru + " nor " + rv +
                                    " can connect to the other");
            continue;
        }
        if (comp.empty()) {
            comp = scc_index(spec);
        }
        if (comp[e.from] == comp[e.to]) {
            plan.warnings.push_back("cut edge " + keys[i] + " lies on a cycle; migration ordering is undefined");
        }
        plan.fragments[ru].cut_edges.push_back(cut);
        plan.fragments[rv].cut_edges.push_back(cut);
        plan.cut_edges.push_back(std::move(cut));
    }
    if (!unschedulable.empty()) {
        throw ValidationError(std::move(unschedulable));
    }
    return plan;
}

MigrationSet graph_diff(const DataflowSpec& spec, const PlacementMapping& old_mapping, const PlacementMapping& new_mapping) {
    std::set<std::string> old_keys, new_keys;
    for (const auto& [p, r] : old_mapping.assignments) {
        old_keys.insert(p);
    }
    for (const auto& [p, r] : new_mapping.assignments) {
        new_keys.insert(p);
    }
    if (old_keys != new_keys) {
        throw ValidationError("mappings cover different processor sets");
    }
    MigrationSet diff;
    for (const auto& [p, r] : old_mapping.assignments) {
        if (new_mapping.assignments.at(p) != r) {
            diff.moved.insert(p);
        }
    }
    diff.affected = diff.moved;
    for (const auto& e : spec.edges) {
        if (diff.moved.contains(e.from) || diff.moved.contains(e.to)) {
            diff.affected.insert(e.from);
            diff.affected.insert(e.to);
        }
    }
    return diff;
}

namespace {

Json cut_json(const CutEdge& c) {
    return Json{{"key", c.key},
                {"from", c.from},
                {"to", c.to},
                {"from_resource", c.from_resource},
                {"to_resource", c.to_resource},
                {"direction", to_string(c.direction)},
                {"link_id", c.link_id}};
}

Json internal_json(const InternalEdge& e) { return Json{{"key", e.key}, {"from", e.from}, {"to", e.to}}; }

}// namespace

Json to_json(const FragmentPlan& plan) {
    Json frags = Json::object();
    for (const auto& [r, f] : plan.fragments) {
        Json internal = Json::array();
        for (const auto& e : f.internal_edges) {
            internal.push_back(internal_json(e));
        }
        frags[r] = {{"processors", f.processors}, {"internal_edges", internal}};
    }
    Json cuts = Json::array();
    for (const auto& c : plan.cut_edges) {
        cuts.push_back(cut_json(c));
    }
    return Json{{"fragments", frags}, {"cut_edges", cuts}, {"warnings", plan.warnings}};
}

Json to_json(const FragmentDescriptor& desc) {
    Json procs = Json::array();
    for (const auto& p : desc.processors) {
        procs.push_back(to_json(p));
    }
    Json edges = Json::array();
    for (const auto& e : desc.edges) {
        edges.push_back(internal_json(e));
    }
    Json links = Json::array();
    for (const auto& l : desc.links) {
        links.push_back({{"id", l.id},
                         {"edge_key", l.edge_key},
                         {"direction", to_string(l.direction)},
                         {"outbound", l.outbound},
                         {"local_processor", l.local_processor},
                         {"remote_processor", l.remote_processor},
                         {"peer_url", l.peer_url}});
    }
    return Json{{"dataflow", desc.dataflow}, {"resource", desc.resource}, {"processors", procs},
                {"edges", edges},           {"links", links},              {"paused", desc.paused}};
}

FragmentDescriptor descriptor_from_json(const Json& doc) {
    try {
        FragmentDescriptor d;
        d.dataflow = doc.at("dataflow").get<std::string>();
        d.resource = doc.value("resource", std::string());
        std::vector<std::string> violations;
        for (const auto& p : doc.at("processors")) {
            d.processors.push_back(processor_from_json(p, violations));
        }
        if (!violations.empty()) {
            throw ValidationError(std::move(violations));
        }
        for (const auto& e : doc.value("edges", Json::array())) {
            d.edges.push_back({e.at("key").get<std::string>(), e.at("from").get<std::string>(), e.at("to").get<std::string>()});
        }
        for (const auto& l : doc.value("links", Json::array())) {
            d.links.push_back({l.at("id").get<std::string>(), l.at("edge_key").get<std::string>(),
                               parse_direction(l.at("direction").get<std::string>()), l.at("outbound").get<bool>(),
                               l.at("local_processor").get<std::string>(), l.value("remote_processor", std::string()),
                               l.value("peer_url", std::string())});
        }
        if (doc.contains("paused")) {
            d.paused = doc["paused"].get<std::set<std::string>>();
        }
        return d;
    } catch (const Json::exception& e) {
        throw ParseError(std::string("malformed fragment descriptor: ") + e.what());
    }
}

std::map<std::string, FragmentDescriptor> build_descriptors(const DataflowSpec& spec, const FragmentPlan& plan,
                                                            const std::string& dataflow_id,
                                                            const std::map<std::string, std::string>& endpoints) {
    auto endpoint = [&](const std::string& r) {
        const auto it = endpoints.find(r);
        if (it == endpoints.end()) {
            throw ValidationError("no endpoint known for resource " + r);
        }
        return it->second;
    };
    std::map<std::string, FragmentDescriptor> out;
    for (const auto& [r, frag] : plan.fragments) {
        FragmentDescriptor d;
        d.dataflow = dataflow_id;
        d.resource = r;
        for (const auto& p : spec.processors) {
            if (frag.processors.contains(p.id)) {
                d.processors.push_back(p);
            }
        }
        d.edges = frag.internal_edges;
        for (const auto& c : frag.cut_edges) {
            const bool outbound = c.from_resource == r;
            d.links.push_back({c.link_id, c.key, c.direction, outbound, outbound ? c.from : c.to, outbound ? c.to : c.from,
                               endpoint(outbound ? c.to_resource : c.from_resource)});
        }
        out.emplace(r, std::move(d));
    }
    return out;
}

}// namespace echo::flow
