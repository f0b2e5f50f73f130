// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#include <echo/common/error.hpp>
#include <echo/common/ids.hpp>
#include <echo/common/time.hpp>
#include <echo/master/master.hpp>

#include <spdlog/spdlog.h>

#include <unistd.h>

namespace echo::master {

using flow::DataflowSpec;
using flow::FragmentDescriptor;
using flow::PlacementMapping;
using Json = nlohmann::json;

namespace {

std::map<std::string, FragmentDescriptor> descriptors_for(const DataflowSpec& spec, const flow::FragmentPlan& plan,
                                                          const std::string& uuid, const std::map<std::string, std::string>& endpoints,
                                                          const std::set<std::string>& paused) {
    auto descs = flow::build_descriptors(spec, plan, uuid, endpoints);
    for (auto& [res, d] : descs) {
        for (const auto& p : d.processors) {
            if (paused.contains(p.id)) {
                d.paused.insert(p.id);
            }
        }
    }
    return descs;
}

std::map<std::string, std::string> endpoints_for(const PlacementMapping& mapping, const ResourceView& view) {
    std::map<std::string, std::string> out;
    for (const auto& res : mapping.resources()) {
        if (const auto* w = view.find(res)) {
            out[res] = w->endpoint;
        }
    }
    return out;
}

}// namespace

Master::Master(MasterOptions options)
    : options_(std::move(options)), catalog_(options_.catalog_url), store_(catalog_), scheduler_(make_scheduler(options_.scheduler)),
      deployer_(options_.deploy), owner_("master-" + std::to_string(::getpid()) + "-" + random_hex(6)) {}

std::string Master::start(std::string_view spec_json) {
    DataflowRecord record;
    record.spec = flow::parse_and_validate(spec_json);
    record.uuid = new_uuid();
    RecordLock lock(store_, record.uuid, owner_, options_.lock_ttl);
    record.transition(FlowState::scheduling);
    store_.save(record);

    const auto fail = [&](const std::string& why) {
        record.transition(FlowState::failed);
        record.warnings.push_back(why);
        try {
            store_.save(record);
        } catch (const std::exception& e) {
            spdlog::warn("dataflow {}: could not record failure: {}", record.uuid, e.what());
        }
    };

    try {
        const auto view = ResourceView::load(catalog_, record.uuid);
        record.mapping = scheduler_->schedule(record.spec, view, nullptr);
        const auto violations = validate_schedule(record.spec, view, record.mapping);
        if (!violations.empty()) {
            throw Error("scheduler " + scheduler_->name() + " produced an unsound mapping: " + violations.front());
        }
        const auto plan = flow::edge_cut(record.spec, record.mapping, view.reachability(), record.uuid);
        record.plan = flow::to_json(plan);
        for (const auto& w : plan.warnings) {
            record.warnings.push_back(w);
        }
        record.endpoints = endpoints_for(record.mapping, view);
        record.fragments = descriptors_for(record.spec, plan, record.uuid, record.endpoints, {});
        record.transition(FlowState::deploying);
        store_.save(record);
        deployer_.deploy_all(record.spec, record.fragments, record.endpoints);
    } catch (const ValidationError& e) {
        // Unschedulable links are a placement problem, not a bad request.
        fail(e.what());
        throw Conflict(std::string("infeasible: ") + e.what());
    } catch (const std::exception& e) {
        fail(e.what());
        throw;
    }
    record.transition(FlowState::running);
    store_.save(record);
    spdlog::info("dataflow {} ({}) running on {} worker(s)", record.uuid, record.spec.name, record.fragments.size());
    return record.uuid;
}

Json Master::stop(const std::string& uuid) {
    RecordLock lock(store_, uuid, owner_, options_.lock_ttl);
    auto record = store_.load(uuid);
    if (record.state == FlowState::stopped) {
        throw Conflict("dataflow " + uuid + " is already stopped");
    }
    if (record.state != FlowState::running && record.state != FlowState::failed) {
        throw Conflict("dataflow " + uuid + " is " + std::string(to_string(record.state)));
    }
    record.transition(FlowState::stopping);
    store_.save(record);
    const auto unreachable = deployer_.undeploy_all(uuid, record.endpoints);
    if (!unreachable.empty()) {
        std::string list;
        for (const auto& r : unreachable) {
            list += (list.empty() ? "" : ",") + r;
        }
        record.warnings.push_back("unreachable workers during stop: " + list);
    }
    record.transition(FlowState::stopped);
    store_.save(record);
    return Json{{"uuid", uuid}, {"state", "stopped"}, {"unreachable", unreachable}};
}

Json Master::rebalance(const std::string& uuid) {
    RecordLock lock(store_, uuid, owner_, options_.lock_ttl);
    auto record = store_.load(uuid);
    if (record.state != FlowState::running) {
        throw Conflict("dataflow " + uuid + " is " + std::string(to_string(record.state)) + ", not running");
    }
    const auto view = ResourceView::load(catalog_, uuid);
    const auto new_mapping = scheduler_->schedule(record.spec, view, &record.mapping);
    const auto violations = validate_schedule(record.spec, view, new_mapping);
    if (!violations.empty()) {
        throw Error("scheduler " + scheduler_->name() + " produced an unsound mapping: " + violations.front());
    }
    const auto diff = flow::graph_diff(record.spec, record.mapping, new_mapping);
    if (diff.moved.empty()) {
        return Json{{"uuid", uuid}, {"mapping", flow::to_json(record.mapping)}, {"moved", Json::array()}, {"noop", true}};
    }
    flow::FragmentPlan plan;
    try {
        plan = flow::edge_cut(record.spec, new_mapping, view.reachability(), uuid);
    } catch (const ValidationError& e) {
        throw Conflict(std::string("infeasible: ") + e.what());
    }
    auto endpoints = record.endpoints;
    for (const auto& [res, url] : endpoints_for(new_mapping, view)) {
        endpoints[res] = url;
    }
    const auto new_fragments = descriptors_for(record.spec, plan, uuid, endpoints, diff.affected);

    record.transition(FlowState::rebalancing);
    store_.save(record);
    const auto t0 = std::chrono::steady_clock::now();
    const auto result =
        deployer_.migrate(record.spec, uuid, record.mapping, new_mapping, record.fragments, new_fragments, endpoints, diff);
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();

    Json out{{"uuid", uuid}, {"moved", diff.moved}, {"affected", diff.affected}, {"migration_ms", ms}, {"batches_moved", result.batches_moved}};
    if (result.rolled_back) {
        record.warnings.push_back("rebalance rolled back at " + now_iso8601() + ": " + result.error);
        record.transition(FlowState::running);
        store_.save(record);
        out["mapping"] = flow::to_json(record.mapping);
        out["rolled_back"] = true;
        out["error"] = result.error;
        throw UnreachableError("rebalance of " + uuid + " failed and was rolled back: " + result.error);
    }
    record.mapping = new_mapping;
    record.plan = flow::to_json(plan);
    record.fragments.clear();
    for (auto [res, d] : new_fragments) {
        d.paused.clear();
        record.fragments.emplace(res, std::move(d));
    }
    std::map<std::string, std::string> live;
    for (const auto& res : new_mapping.resources()) {
        live[res] = endpoints.at(res);
    }
    record.endpoints = live;
    ++record.rebalances;
    record.transition(FlowState::running);
    store_.save(record);
    out["mapping"] = flow::to_json(new_mapping);
    spdlog::info("dataflow {} rebalanced in {} ms, moved {} processor(s), carried {} batch(es)", uuid, ms, diff.moved.size(),
                 result.batches_moved);
    return out;
}

Json Master::describe(const std::string& uuid) const {
    const auto record = store_.load(uuid);
    auto doc = record.to_json();
    doc.erase("fragments");
    Json procs = Json::object();
    for (const auto& item : catalog_.query("/dataflow/" + uuid + "/metrics/")) {
        const auto worker = item.value_or("urn:echo:rel:worker", "");
        Json m;
        try {
            m = Json::parse(item.value_or("urn:echo:rel:metrics", "{}"));
        } catch (const std::exception&) {
            continue;
        }
        const auto m_procs = m.value("processors", Json::object());
        for (const auto& [pid, pm] : m_procs.items()) {
            const auto placed = record.mapping.assignments.find(pid);
            if (placed == record.mapping.assignments.end() || placed->second != worker) {
                continue;
            }
            Json s{{"worker", worker}, {"state", pm.value("state", "")}};
            for (const auto* f : {"in_tuples", "out_tuples", "in_batches", "out_batches", "errors", "in_tuples_per_s", "out_tuples_per_s"}) {
                if (pm.contains(f)) {
                    s[f] = pm[f];
                }
            }
            if (pm.contains("logic")) {
                s["logic"] = pm["logic"];
            }
            procs[pid] = s;
        }
    }
    doc["metrics"] = procs;
    return doc;
}

Json Master::list() const {
    Json out = Json::array();
    for (const auto& uuid : store_.list()) {
        try {
            const auto r = store_.load(uuid);
            out.push_back({{"uuid", uuid}, {"name", r.spec.name}, {"state", to_string(r.state)}});
        } catch (const std::exception&) {
            out.push_back({{"uuid", uuid}, {"state", "unknown"}});
        }
    }
    return out;
}

}// namespace echo::master
