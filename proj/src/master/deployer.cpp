// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#include <echo/catalog/catalog_client.hpp>
#include <echo/common/error.hpp>
#include <echo/master/deployer.hpp>

#include <spdlog/spdlog.h>

#include <algorithm>
#include <thread>

namespace echo::master {

using flow::FragmentDescriptor;
using Json = nlohmann::json;

EngineClient::EngineClient(std::string url) : http_(std::move(url), {std::chrono::milliseconds(2000), std::chrono::milliseconds(15000)}) {}

net::HttpResult EngineClient::checked(net::HttpResult r, const std::string& what) const {
    if (!r.ok()) {
        catalog::raise_for(r, what + " on " + http_.base_url());
    }
    return r;
}

void EngineClient::deploy(const FragmentDescriptor& desc, bool start) const {
    auto doc = flow::to_json(desc);
    doc["start"] = start;
    checked(http_.post_json("/fragments", doc), "deploy");
}

void EngineClient::start(const std::string& fragment) const {
    checked(http_.post("/fragments/" + net::url_encode(fragment) + "/start", "{}"), "start");
}

Json EngineClient::undeploy(const std::string& fragment) const {
    return checked(http_.post("/fragments/" + net::url_encode(fragment) + "/undeploy", "{}"), "undeploy").json();
}

void EngineClient::rewire(const FragmentDescriptor& desc) const {
    checked(http_.post_json("/fragments/" + net::url_encode(desc.dataflow) + "/rewire", flow::to_json(desc)), "rewire");
}

bool EngineClient::pause(const std::string& fragment, const std::string& processor) const {
    const auto r = checked(
        http_.post("/fragments/" + net::url_encode(fragment) + "/processors/" + net::url_encode(processor) + "/pause", "{}"), "pause");
    return r.json().value("parked", false);
}

void EngineClient::resume(const std::string& fragment, const std::string& processor) const {
    checked(http_.post("/fragments/" + net::url_encode(fragment) + "/processors/" + net::url_encode(processor) + "/resume", "{}"),
            "resume");
}

Json EngineClient::queues(const std::string& fragment) const {
    return checked(http_.get("/fragments/" + net::url_encode(fragment) + "/queues"), "queues").json();
}

Json EngineClient::metrics(const std::string& fragment) const {
    return checked(http_.get("/fragments/" + net::url_encode(fragment) + "/metrics"), "metrics").json();
}

Json EngineClient::list() const { return checked(http_.get("/fragments"), "list").json(); }

Json EngineClient::take(const std::string& fragment, const std::string& edge_key) const {
    return checked(http_.post("/fragments/" + net::url_encode(fragment) + "/queues/" + net::url_encode(edge_key) + "/take", "{}"), "take")
        .json()
        .value("batches", Json::array());
}

void EngineClient::inject(const std::string& fragment, const std::string& edge_key, const Json& envelopes) const {
    checked(http_.post_json("/fragments/" + net::url_encode(fragment) + "/queues/" + net::url_encode(edge_key) + "/inject",
                            Json{{"batches", envelopes}}),
            "inject");
}

bool EngineClient::healthy() const { return http_.get("/health").ok(); }

namespace {

const std::string& endpoint_of(const std::map<std::string, std::string>& endpoints, const std::string& resource) {
    const auto it = endpoints.find(resource);
    if (it == endpoints.end() || it->second.empty()) {
        throw UnreachableError("no endpoint known for worker " + resource);
    }
    return it->second;
}

/// Fragments ordered so that downstream fragments start first.
std::vector<std::string> start_order(const flow::DataflowSpec& spec, const std::map<std::string, FragmentDescriptor>& fragments) {
    std::map<std::string, std::size_t> pos;
    const auto topo = flow::topological_order(spec);
    for (std::size_t i = 0; i < topo.size(); ++i) {
        pos[topo[i]] = i;
    }
    std::vector<std::pair<std::size_t, std::string>> keyed;
    for (const auto& [res, d] : fragments) {
        std::size_t first = topo.size();
        for (const auto& p : d.processors) {
            first = std::min(first, pos[p.id]);
        }
        keyed.emplace_back(first, res);
    }
    std::sort(keyed.rbegin(), keyed.rend());
    std::vector<std::string> out;
    for (const auto& [k, res] : keyed) {
        out.push_back(res);
    }
    return out;
}

bool hosts(const FragmentDescriptor& d, const std::string& processor) {
    return std::any_of(d.processors.begin(), d.processors.end(), [&](const auto& p) { return p.id == processor; });
}

}// namespace

void Deployer::deploy_all(const flow::DataflowSpec& spec, const std::map<std::string, FragmentDescriptor>& fragments,
                          const std::map<std::string, std::string>& endpoints) const {
    std::vector<std::string> created;
    std::string current;
    try {
        for (const auto& [res, desc] : fragments) {
            current = res;
            EngineClient(endpoint_of(endpoints, res)).deploy(desc, false);
            created.push_back(res);
        }
        for (const auto& res : start_order(spec, fragments)) {
            current = res;
            EngineClient(endpoint_of(endpoints, res)).start(fragments.at(res).dataflow);
        }
    } catch (const std::exception& e) {
        spdlog::warn("deploy failed on {}: {}; rolling back {} fragment(s)", current, e.what(), created.size());
        for (const auto& res : created) {
            try {
                EngineClient(endpoint_of(endpoints, res)).undeploy(fragments.at(res).dataflow);
            } catch (const std::exception& u) {
                spdlog::warn("rollback undeploy on {} failed: {}", res, u.what());
            }
        }
        throw UnreachableError("worker " + current + " rejected deployment: " + e.what());
    }
}

std::vector<std::string> Deployer::undeploy_all(const std::string& uuid, const std::map<std::string, std::string>& endpoints) const {
    std::vector<std::string> unreachable;
    for (const auto& [res, url] : endpoints) {
        bool done = false;
        for (int attempt = 0; attempt < 3 && !done; ++attempt) {
            try {
                EngineClient(url).undeploy(uuid);
                done = true;
            } catch (const NotFound&) {
                done = true;
            } catch (const std::exception& e) {
                spdlog::warn("undeploy {} on {} (attempt {}): {}", uuid, res, attempt + 1, e.what());
                std::this_thread::sleep_for(std::chrono::milliseconds(300));
            }
        }
        if (!done) {
            unreachable.push_back(res);
        }
    }
    return unreachable;
}

Deployer::MigrationResult Deployer::migrate(const flow::DataflowSpec& spec, const std::string& uuid,
                                            const flow::PlacementMapping& old_mapping, const flow::PlacementMapping& new_mapping,
                                            const std::map<std::string, FragmentDescriptor>& old_fragments,
                                            const std::map<std::string, FragmentDescriptor>& new_fragments,
                                            const std::map<std::string, std::string>& endpoints,
                                            const flow::MigrationSet& diff) const {
    MigrationResult result;
    const auto client = [&](const std::string& res) { return EngineClient(endpoint_of(endpoints, res)); };

    // Edges whose endpoints change host; their queued batches are carried over.
    struct Moving {
        std::string key, from, to;
        Json batches = Json::array();
        bool injected = false;
    };
    std::vector<Moving> edges;
    const auto keys = flow::edge_keys(spec);
    for (std::size_t i = 0; i < spec.edges.size(); ++i) {
        const auto& e = spec.edges[i];
        if (old_mapping.at(e.from) != new_mapping.at(e.from) || old_mapping.at(e.to) != new_mapping.at(e.to)) {
            edges.push_back({keys[i], e.from, e.to});
        }
    }

    std::vector<std::pair<std::string, std::string>> paused;// (resource, processor)
    const auto resume_all = [&](const flow::PlacementMapping& mapping) {
        for (const auto& p : diff.affected) {
            try {
                client(mapping.at(p)).resume(uuid, p);
            } catch (const std::exception& e) {
                spdlog::warn("resume {} on {} failed: {}", p, mapping.at(p), e.what());
            }
        }
    };

    try {
        for (const auto& p : diff.affected) {
            client(old_mapping.at(p)).pause(uuid, p);
            paused.emplace_back(old_mapping.at(p), p);
        }

        // Drain: once the upstream is parked and its outbound queue is empty,
        // nothing more can enter the edge, so one last take empties it.
        for (auto& e : edges) {
            const auto up_res = old_mapping.at(e.from);
            const auto down_res = old_mapping.at(e.to);
            const auto deadline = std::chrono::steady_clock::now() + options_.drain_timeout;
            while (true) {
                const auto m = client(up_res).metrics(uuid);
                const bool parked = m["processors"][e.from].value("parked", false) || m["processors"][e.from].value("finished", false);
                std::int64_t out_depth = 0;
                if (up_res != down_res) {
                    const auto q = client(up_res).queues(uuid);
                    if (q["out"].contains(e.key)) {
                        out_depth = q["out"][e.key].value("depth", 0);
                    }
                }
                const bool quiet = parked && out_depth == 0;
                for (auto& b : client(down_res).take(uuid, e.key)) {
                    e.batches.push_back(std::move(b));
                }
                if (quiet) {
                    break;
                }
                if (std::chrono::steady_clock::now() >= deadline) {
                    throw Error("edge " + e.key + " did not drain (upstream parked=" + std::string(parked ? "yes" : "no") +
                                ", outbound depth " + std::to_string(out_depth) + ")");
                }
                std::this_thread::sleep_for(std::chrono::milliseconds(20));
            }
            result.batches_moved += e.batches.size();
        }

        if (options_.fault_delay.count() > 0) {
            spdlog::info("migration of {}: fault-injection delay {} ms", uuid, options_.fault_delay.count());
            std::this_thread::sleep_for(options_.fault_delay);
        }

        // Reconcile: hosts that are new first, then surviving hosts, so that
        // rewired links find their peers.
        for (const auto& [res, desc] : new_fragments) {
            if (!old_fragments.contains(res)) {
                client(res).deploy(desc, true);
            }
        }
        for (const auto& [res, desc] : new_fragments) {
            if (old_fragments.contains(res)) {
                client(res).rewire(desc);
            }
        }
        for (auto& e : edges) {
            if (!e.batches.empty()) {
                client(new_mapping.at(e.to)).inject(uuid, e.key, e.batches);
            }
            e.injected = true;
        }
        resume_all(new_mapping);
        for (const auto& [res, desc] : old_fragments) {
            if (new_fragments.contains(res)) {
                continue;
            }
            try {
                const auto left = client(res).undeploy(uuid);
                if (left.value("queued", 0) != 0) {
                    spdlog::warn("vacated fragment on {} still held {} batches", res, left["queued"].dump());
                }
            } catch (const std::exception& e) {
                spdlog::warn("undeploy of vacated fragment on {} failed: {}", res, e.what());
            }
        }
        return result;
    } catch (const std::exception& failure) {
        spdlog::warn("migration of {} failed: {}; restoring the old placement", uuid, failure.what());
        result.rolled_back = true;
        result.error = failure.what();
    }

    // Rollback onto the old placement.
    for (const auto& [res, desc] : new_fragments) {
        if (!old_fragments.contains(res)) {
            try {
                client(res).undeploy(uuid);
            } catch (const std::exception&) {
            }
        }
    }
    std::vector<std::string> problems;
    for (const auto& [res, desc] : old_fragments) {
        auto restored = desc;
        for (const auto& p : diff.affected) {
            if (hosts(restored, p)) {
                restored.paused.insert(p);
            }
        }
        try {
            try {
                client(res).rewire(restored);
            } catch (const NotFound&) {
                client(res).deploy(restored, true);
            }
        } catch (const std::exception& e) {
            problems.push_back("restore on " + res + ": " + e.what());
        }
    }
    for (auto& e : edges) {
        if (e.injected) {
            continue;
        }
        if (e.batches.empty()) {
            continue;
        }
        try {
            client(old_mapping.at(e.to)).inject(uuid, e.key, e.batches);
        } catch (const std::exception& ex) {
            problems.push_back("re-inject " + e.key + ": " + ex.what());
        }
    }
    resume_all(old_mapping);
    for (const auto& p : problems) {
        result.error += "; " + p;
    }
    return result;
}

}// namespace echo::master
