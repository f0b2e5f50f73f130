// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#include <echo/common/error.hpp>
#include <echo/flowmodel/dataflow.hpp>

#include <algorithm>
#include <set>

namespace echo::flow {

using Json = nlohmann::json;

std::string_view to_string(DataModel model) {
    switch (model) {
        case DataModel::stream: return "stream";
        case DataModel::microbatch: return "microbatch";
        case DataModel::file: return "file";
    }
    return "microbatch";
}

std::optional<DataModel> parse_data_model(std::string_view text) {
    if (text == "stream") {
        return DataModel::stream;
    }
    if (text == "microbatch") {
        return DataModel::microbatch;
    }
    if (text == "file") {
        return DataModel::file;
    }
    return std::nullopt;
}

const ProcessorSpec* DataflowSpec::find(std::string_view id) const {
    for (const auto& p : processors) {
        if (p.id == id) {
            return &p;
        }
    }
    return nullptr;
}

std::vector<std::string> DataflowSpec::processor_ids() const {
    std::vector<std::string> ids;
    ids.reserve(processors.size());
    for (const auto& p : processors) {
        ids.push_back(p.id);
    }
    return ids;
}

namespace {

bool valid_id(std::string_view id) {
    return !id.empty() && std::all_of(id.begin(), id.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == ':' || c == '-';
    });
}

bool valid_kind(std::string_view kind) {
    if (kind == "cep" || kind == "exec" || kind == "bridge") {
        return true;
    }
    return kind.starts_with("builtin:") && kind.size() > 8;
}

}// namespace

ValidationReport validate(const DataflowSpec& spec) {
    ValidationReport report;
    std::set<std::string> ids;
    if (spec.processors.empty()) {
        report.violations.push_back("dataflow has no processors");
    }
    for (const auto& p : spec.processors) {
        if (!valid_id(p.id)) {
            report.violations.push_back("invalid processor id '" + p.id + "' (allowed: letters, digits, _ . : -)");
        }
        if (!ids.insert(p.id).second) {
            report.violations.push_back("duplicate id " + p.id);
        }
        if (!valid_kind(p.kind)) {
            report.violations.push_back("processor " + p.id + " has unknown kind '" + p.kind + "'");
        }
        if (p.demands.cpu_millis < 0 || p.demands.mem_mb < 0) {
            report.violations.push_back("processor " + p.id + " has negative demands");
        }
    }
    std::set<std::string> has_input;
    for (const auto& e : spec.edges) {
        bool ok = true;
        for (const auto* end : {&e.from, &e.to}) {
            if (!ids.contains(*end)) {
                report.violations.push_back("unknown processor " + *end);
                ok = false;
            }
        }
        if (ok && e.from != e.to) {
            has_input.insert(e.to);
        }
    }
    if (!spec.processors.empty() && report.violations.empty()) {
        const bool any_source = std::any_of(spec.processors.begin(), spec.processors.end(),
                                            [&](const ProcessorSpec& p) { return !has_input.contains(p.id); });
        if (!any_source) {
            report.violations.push_back("no source: every processor has an incoming edge, nothing can ingest");
        }
    }
    return report;
}

Json to_json(const ProcessorSpec& p) {
    return Json{{"id", p.id},
                {"kind", p.kind},
                {"input_model", to_string(p.input_model)},
                {"output_model", to_string(p.output_model)},
                {"config", p.config},
                {"demands", {{"cpu_millis", p.demands.cpu_millis}, {"mem_mb", p.demands.mem_mb}}},
                {"constraints", p.constraints}};
}

Json to_json(const DataflowSpec& spec) {
    Json procs = Json::array();
    for (const auto& p : spec.processors) {
        procs.push_back(to_json(p));
    }
    Json edges = Json::array();
    for (const auto& e : spec.edges) {
        edges.push_back({{"from", e.from}, {"to", e.to}});
    }
    Json qos = Json::object();
    for (const auto& [k, v] : spec.qos) {
        qos[k] = v;
    }
    return Json{{"name", spec.name}, {"processors", std::move(procs)}, {"edges", std::move(edges)}, {"qos", std::move(qos)}};
}

ProcessorSpec processor_from_json(const Json& doc, std::vector<std::string>& violations) {
    ProcessorSpec p;
    if (!doc.is_object()) {
        violations.push_back("processor entry must be an object");
        return p;
    }
    if (doc.contains("id") && doc["id"].is_string()) {
        p.id = doc["id"].get<std::string>();
    } else {
        violations.push_back("processor lacks a string id");
    }
    const std::string who = p.id.empty() ? std::string("<unnamed>") : p.id;
    if (doc.contains("kind") && doc["kind"].is_string()) {
        p.kind = doc["kind"].get<std::string>();
    } else {
        violations.push_back("processor " + who + " lacks a kind");
    }
    for (auto [key, target] : {std::pair{"input_model", &p.input_model}, std::pair{"output_model", &p.output_model}}) {
        if (!doc.contains(key)) {
            violations.push_back("processor " + who + " is missing " + key);
            continue;
        }
        const auto model = doc[key].is_string() ? parse_data_model(doc[key].get<std::string>()) : std::nullopt;
        if (!model) {
            violations.push_back("processor " + who + " has invalid " + key + " (stream|microbatch|file)");
            continue;
        }
        *target = *model;
    }
    if (doc.contains("config")) {
        if (doc["config"].is_object()) {
            p.config = doc["config"];
        } else {
            violations.push_back("processor " + who + " config must be an object");
        }
    }
    if (doc.contains("demands")) {
        const auto& d = doc["demands"];
        auto read = [&](const char* key, std::int64_t& out) {
            if (!d.contains(key)) {
                return;
            }
            if (!d[key].is_number_integer()) {
                violations.push_back("processor " + who + " demands." + key + " must be an integer");
                return;
            }
            out = d[key].get<std::int64_t>();
            if (out < 0) {
                violations.push_back("processor " + who + " demands." + key + " must be >= 0");
            }
        };
        if (d.is_object()) {
            read("cpu_millis", p.demands.cpu_millis);
            read("mem_mb", p.demands.mem_mb);
        } else {
            violations.push_back("processor " + who + " demands must be an object");
        }
    }
    if (doc.contains("constraints")) {
        const auto& c = doc["constraints"];
        if (c.is_array() && std::all_of(c.begin(), c.end(), [](const Json& t) { return t.is_string(); })) {
            p.constraints = c.get<std::vector<std::string>>();
        } else {
            violations.push_back("processor " + who + " constraints must be a list of strings");
        }
    }
    return p;
}

DataflowSpec dataflow_from_json(const Json& doc) {
    std::vector<std::string> violations;
    DataflowSpec spec;
    if (!doc.is_object()) {
        throw ValidationError("dataflow must be a JSON object");
    }
    if (doc.contains("name") && doc["name"].is_string()) {
        spec.name = doc["name"].get<std::string>();
    } else {
        violations.push_back("dataflow lacks a string name");
    }
    if (!doc.contains("processors") || !doc["processors"].is_array()) {
        violations.push_back("dataflow lacks a processors array");
    } else {
        for (const auto& p : doc["processors"]) {
            spec.processors.push_back(processor_from_json(p, violations));
        }
    }
    if (doc.contains("edges")) {
        if (!doc["edges"].is_array()) {
            violations.push_back("edges must be an array");
        } else {
            for (const auto& e : doc["edges"]) {
                if (!e.is_object() || !e.contains("from") || !e.contains("to") || !e["from"].is_string() ||
                    !e["to"].is_string()) {
                    violations.push_back("edge " + e.dump() + " needs string from/to");
                    continue;
                }
                spec.edges.push_back({e["from"].get<std::string>(), e["to"].get<std::string>()});
            }
        }
    }
    if (doc.contains("qos")) {
        if (!doc["qos"].is_object()) {
            violations.push_back("qos must be an object");
        } else {
            for (const auto& [k, v] : doc["qos"].items()) {
                spec.qos[k] = v.is_string() ? v.get<std::string>() : v.dump();
            }
        }
    }
    if (!violations.empty()) {
        throw ValidationError(std::move(violations));
    }
    return spec;
}

DataflowSpec parse_and_validate(std::string_view text) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ParseError(std::string("dataflow is not valid JSON: ") + e.what());
    }
    auto spec = dataflow_from_json(doc);
    auto report = validate(spec);
    if (!report.ok()) {
        throw ValidationError(std::move(report.violations));
    }
    return spec;
}

std::vector<std::string> edge_keys(const DataflowSpec& spec) {
    std::vector<std::string> keys;
    keys.reserve(spec.edges.size());
    std::map<std::string, int> seen;
    for (const auto& e : spec.edges) {
        auto base = e.from + "->" + e.to;
        const int k = seen[base]++;
        keys.push_back(k == 0 ? base : base + "#" + std::to_string(k));
    }
    return keys;
}

std::vector<std::string> topological_order(const DataflowSpec& spec) {
    std::map<std::string, int> indegree;
    std::map<std::string, std::vector<std::string>> out;
    for (const auto& p : spec.processors) {
        indegree[p.id] = 0;
    }
    for (const auto& e : spec.edges) {
        if (e.from == e.to || !indegree.contains(e.from) || !indegree.contains(e.to)) {
            continue;
        }
        ++indegree[e.to];
        out[e.from].push_back(e.to);
    }
    std::vector<std::string> order;
    std::set<std::string> ready;
    std::set<std::string> remaining;
    for (const auto& [id, deg] : indegree) {
        remaining.insert(id);
        if (deg == 0) {
            ready.insert(id);
        }
    }
    while (!remaining.empty()) {
        if (ready.empty()) {
            ready.insert(*remaining.begin());
        }
        const auto id = *ready.begin();
        ready.erase(ready.begin());
        if (!remaining.erase(id)) {
            continue;
        }
        order.push_back(id);
        for (const auto& next : out[id]) {
            if (--indegree[next] == 0 && remaining.contains(next)) {
                ready.insert(next);
            }
        }
    }
    return order;
}

}// namespace echo::flow
