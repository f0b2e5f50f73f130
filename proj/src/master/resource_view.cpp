// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#include <echo/catalog/catalog.hpp>
#include <echo/common/error.hpp>
#include <echo/master/resource_view.hpp>
#include <echo/master/store.hpp>

#include <spdlog/spdlog.h>

#include <algorithm>
#include <sstream>

namespace echo::master {

namespace rel = catalog::rel;
using catalog::CatalogItem;

namespace {

std::set<std::string> split_csv(const std::string& text) {
    std::set<std::string> out;
    std::stringstream ss(text);
    for (std::string part; std::getline(ss, part, ',');) {
        if (!part.empty()) {
            out.insert(part);
        }
    }
    return out;
}

std::int64_t to_int(const CatalogItem& item, std::string_view r) {
    try {
        return std::stoll(item.value_or(r, "0"));
    } catch (const std::exception&) {
        return 0;
    }
}

std::vector<std::string> path_segments(const std::string& href) {
    std::vector<std::string> out;
    std::stringstream ss(href);
    for (std::string part; std::getline(ss, part, '/');) {
        if (!part.empty()) {
            out.push_back(part);
        }
    }
    return out;
}

}// namespace

const WorkerView* ResourceView::find(const std::string& id) const {
    for (const auto& w : workers) {
        if (w.id == id) {
            return &w;
        }
    }
    return nullptr;
}

flow::Reachability ResourceView::reachability() const {
    flow::Reachability reach;
    for (const auto& w : workers) {
        reach.set_device(w.id, w.device);
        reach.accept_from(w.id, w.reachable_from);
    }
    return reach;
}

std::map<std::string, std::string> ResourceView::endpoints() const {
    std::map<std::string, std::string> out;
    for (const auto& w : workers) {
        out[w.id] = w.endpoint;
    }
    return out;
}

ResourceView ResourceView::load(const catalog::CatalogClient& catalog, const std::string& exclude_dataflow) {
    std::map<std::string, CatalogItem> devices;
    for (auto& item : catalog.query("/device/")) {
        const auto seg = path_segments(item.href);
        if (seg.size() == 2) {
            devices.emplace(seg[1], std::move(item));
        }
    }
    ResourceView view;
    for (const auto& item : catalog.query("/worker/")) {
        const auto seg = path_segments(item.href);
        if (seg.size() != 2) {
            continue;
        }
        if (item.value_or(rel::kState, "") != "up" || item.value_or(rel::kStale, "false") == "true") {
            continue;
        }
        WorkerView w;
        w.id = seg[1];
        w.device = item.value_or(rel::kParent, "");
        w.cpu_millis = to_int(item, rel::kCpuMillis);
        w.mem_mb = to_int(item, rel::kMemMb);
        w.endpoint = item.value_or(rel::kEndpoint, "");
        w.profile = item.value_or(rel::kProfile, "");
        const auto dev = devices.find(w.device);
        if (dev == devices.end() || dev->second.value_or(rel::kState, "up") != "up" ||
            dev->second.value_or(rel::kStale, "false") == "true") {
            continue;
        }
        w.device_class = dev->second.value_or(rel::kClass, "edge");
        w.tags = split_csv(dev->second.value_or(rel::kTags, ""));
        w.tags.insert(w.device_class);
        w.reachable_from = split_csv(dev->second.value_or(rel::kReachableFrom, "*"));
        if (w.endpoint.empty()) {
            continue;
        }
        view.workers.push_back(std::move(w));
    }
    std::sort(view.workers.begin(), view.workers.end(), [](const auto& a, const auto& b) { return a.id < b.id; });

    // Allotments: demands of every active dataflow's placed processors.
    std::map<std::string, std::map<std::string, CatalogItem>> flows;
    for (auto& item : catalog.query("/dataflow/")) {
        const auto seg = path_segments(item.href);
        if (seg.size() < 2 || seg.size() > 3 || seg[1] == exclude_dataflow) {
            continue;
        }
        flows[seg[1]][seg.size() == 2 ? "" : seg[2]] = std::move(item);
    }
    for (const auto& [uuid, items] : flows) {
        const auto top = items.find("");
        const auto spec_item = items.find("spec");
        const auto map_item = items.find("mapping");
        if (top == items.end() || spec_item == items.end() || map_item == items.end()) {
            continue;
        }
        const auto state = top->second.value_or(rel::kState, "");
        if (state != "deploying" && state != "running" && state != "rebalancing") {
            continue;
        }
        try {
            const auto spec = flow::dataflow_from_json(nlohmann::json::parse(spec_item->second.value_or(kJsonRel, "{}")));
            const auto mapping = flow::mapping_from_json(nlohmann::json::parse(map_item->second.value_or(kJsonRel, "{}")));
            for (const auto& p : spec.processors) {
                const auto it = mapping.assignments.find(p.id);
                if (it == mapping.assignments.end()) {
                    continue;
                }
                for (auto& w : view.workers) {
                    if (w.id == it->second) {
                        w.allotted_cpu += p.demands.cpu_millis;
                        w.allotted_mem += p.demands.mem_mb;
                    }
                }
            }
        } catch (const std::exception& e) {
            spdlog::warn("resource view: skipping dataflow {}: {}", uuid, e.what());
        }
    }
    return view;
}

}// namespace echo::master
