// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#include <echo/common/error.hpp>
#include <echo/common/time.hpp>
#include <echo/master/store.hpp>

namespace echo::master {

using catalog::CatalogItem;
using Json = nlohmann::json;
namespace rel = catalog::rel;

namespace {

constexpr std::string_view kNameRel = "urn:echo:rel:name";
constexpr std::string_view kTransitionRel = "urn:echo:rel:transition";
constexpr std::string_view kRebalancesRel = "urn:echo:rel:rebalances";
constexpr std::string_view kOwnerRel = "urn:echo:rel:owner";

std::string base(const std::string& uuid) { return "/dataflow/" + uuid; }

CatalogItem json_item(const std::string& href, const Json& doc) {
    CatalogItem item{href, {}};
    item.set(kJsonRel, doc.dump());
    return item;
}

Json read_json(const catalog::CatalogClient& catalog, const std::string& href) {
    const auto item = catalog.get(href);
    if (!item) {
        throw NotFound("missing " + href);
    }
    return Json::parse(item->value_or(kJsonRel, "null"));
}

}// namespace

std::string_view to_string(FlowState s) {
    switch (s) {
        case FlowState::scheduling: return "scheduling";
        case FlowState::deploying: return "deploying";
        case FlowState::running: return "running";
        case FlowState::rebalancing: return "rebalancing";
        case FlowState::stopping: return "stopping";
        case FlowState::stopped: return "stopped";
        case FlowState::failed: return "failed";
    }
    return "failed";
}

FlowState parse_flow_state(std::string_view text) {
    for (auto s : {FlowState::scheduling, FlowState::deploying, FlowState::running, FlowState::rebalancing, FlowState::stopping,
                   FlowState::stopped, FlowState::failed}) {
        if (to_string(s) == text) {
            return s;
        }
    }
    throw ParseError("unknown dataflow state '" + std::string(text) + "'");
}

void DataflowRecord::transition(FlowState next) {
    state = next;
    transitions.emplace_back(std::string(to_string(next)), now_iso8601());
}

Json DataflowRecord::to_json() const {
    Json trans = Json::array();
    for (const auto& [s, at] : transitions) {
        trans.push_back({{"state", s}, {"at", at}});
    }
    Json frags = Json::object();
    for (const auto& [r, d] : fragments) {
        frags[r] = flow::to_json(d);
    }
    return Json{{"uuid", uuid},
                {"name", spec.name},
                {"state", to_string(state)},
                {"transitions", trans},
                {"warnings", warnings},
                {"mapping", flow::to_json(mapping)},
                {"plan", plan},
                {"endpoints", endpoints},
                {"rebalances", rebalances},
                {"spec", flow::to_json(spec)},
                {"fragments", frags}};
}

void RecordStore::save(const DataflowRecord& r) const {
    const auto b = base(r.uuid);
    catalog_.put(json_item(b + "/spec", flow::to_json(r.spec)));
    catalog_.put(json_item(b + "/mapping", flow::to_json(r.mapping)));
    catalog_.put(json_item(b + "/plan", r.plan));
    Json frags = Json::object();
    for (const auto& [res, d] : r.fragments) {
        frags[res] = flow::to_json(d);
    }
    catalog_.put(json_item(b + "/fragments", Json{{"descriptors", frags}, {"endpoints", r.endpoints}}));
    CatalogItem top{b, {}};
    top.set(kNameRel, r.spec.name);
    top.set(rel::kState, std::string(to_string(r.state)));
    top.set(kRebalancesRel, std::to_string(r.rebalances));
    for (const auto& [s, at] : r.transitions) {
        top.add(kTransitionRel, s + "@" + at);
    }
    for (const auto& w : r.warnings) {
        top.add(rel::kWarning, w);
    }
    catalog_.put(top);
}

DataflowRecord RecordStore::load(const std::string& uuid) const {
    const auto top = catalog_.get(base(uuid));
    if (!top) {
        throw NotFound("unknown dataflow " + uuid);
    }
    DataflowRecord r;
    r.uuid = uuid;
    r.state = parse_flow_state(top->value_or(rel::kState, "failed"));
    r.rebalances = std::stoi(top->value_or(kRebalancesRel, "0"));
    for (const auto& t : top->values(kTransitionRel)) {
        const auto at = t.find('@');
        r.transitions.emplace_back(t.substr(0, at), at == std::string::npos ? "" : t.substr(at + 1));
    }
    r.warnings = top->values(rel::kWarning);
    const auto b = base(uuid);
    r.spec = flow::dataflow_from_json(read_json(catalog_, b + "/spec"));
    r.mapping = flow::mapping_from_json(read_json(catalog_, b + "/mapping"));
    r.plan = read_json(catalog_, b + "/plan");
    const auto frags = read_json(catalog_, b + "/fragments");
    const auto descs = frags.value("descriptors", Json::object());
    for (const auto& [res, d] : descs.items()) {
        r.fragments.emplace(res, flow::descriptor_from_json(d));
    }
    r.endpoints = frags.value("endpoints", std::map<std::string, std::string>{});
    return r;
}

std::vector<std::string> RecordStore::list() const {
    std::vector<std::string> out;
    for (const auto& item : catalog_.query("/dataflow/")) {
        const auto rest = item.href.substr(std::string("/dataflow/").size());
        if (!rest.empty() && rest.find('/') == std::string::npos) {
            out.push_back(rest);
        }
    }
    return out;
}

void RecordStore::lock(const std::string& uuid, const std::string& owner, std::chrono::milliseconds ttl) const {
    CatalogItem item{base(uuid) + "/lock", {}};
    item.set(kOwnerRel, owner);
    item.set(rel::kExpires, iso8601_utc(SysClock::now() + ttl));
    if (!catalog_.put_if_absent(item)) {
        throw Conflict("dataflow " + uuid + " is busy with another lifecycle request");
    }
}

void RecordStore::unlock(const std::string& uuid) const { catalog_.remove(base(uuid) + "/lock"); }

RecordLock::RecordLock(const RecordStore& store, std::string uuid, const std::string& owner, std::chrono::milliseconds ttl)
    : store_(store), uuid_(std::move(uuid)) {
    store_.lock(uuid_, owner, ttl);
}

RecordLock::~RecordLock() {
    try {
        store_.unlock(uuid_);
    } catch (const std::exception&) {
        // The TTL frees it eventually.
    }
}

}// namespace echo::master
