// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <echo/flowmodel/partition.hpp>
#include <echo/master/store.hpp>
#include <echo/net/http.hpp>

#include <json.hpp>

#include <chrono>
#include <map>
#include <set>
#include <string>

namespace echo::master {

/// Client of an engine's control API.
class EngineClient {
  public:
    explicit EngineClient(std::string url);

    void deploy(const flow::FragmentDescriptor& desc, bool start) const;
    void start(const std::string& fragment) const;
    nlohmann::json undeploy(const std::string& fragment) const;
    void rewire(const flow::FragmentDescriptor& desc) const;
    /// Returns whether the processor has parked.
    bool pause(const std::string& fragment, const std::string& processor) const;
    void resume(const std::string& fragment, const std::string& processor) const;
    nlohmann::json queues(const std::string& fragment) const;
    nlohmann::json metrics(const std::string& fragment) const;
    nlohmann::json list() const;
    /// Envelopes of the batches removed from an input queue.
    nlohmann::json take(const std::string& fragment, const std::string& edge_key) const;
    void inject(const std::string& fragment, const std::string& edge_key, const nlohmann::json& envelopes) const;
    bool healthy() const;

    const std::string& url() const noexcept { return http_.base_url(); }

  private:
    net::HttpResult checked(net::HttpResult r, const std::string& what) const;
    net::HttpClient http_;
};

struct DeployOptions {
    std::chrono::milliseconds fault_delay{0};///< pause inside a migration, for fault injection
    std::chrono::milliseconds drain_timeout{30000};
};

/// Enacts placements on engines. Every method works from the descriptors it
/// is given, so it can run in any master process.
class Deployer {
  public:
    explicit Deployer(DeployOptions options = {}) : options_(options) {}

    /// Creates every fragment, then starts them sinks first. On failure the
    /// created fragments are undeployed and UnreachableError names the worker.
    void deploy_all(const flow::DataflowSpec& spec, const std::map<std::string, flow::FragmentDescriptor>& fragments,
                    const std::map<std::string, std::string>& endpoints) const;

    /// Undeploys everything; returns the resources that could not be reached.
    std::vector<std::string> undeploy_all(const std::string& uuid, const std::map<std::string, std::string>& endpoints) const;

    struct MigrationResult {
        bool rolled_back = false;
        std::string error;
        std::size_t batches_moved = 0;
    };

    /// Moves a running dataflow from `old_fragments` to `new_fragments`:
    /// pause affected, drain changed edges, reconcile (new hosts first), inject
    /// the drained batches, resume. On failure it restores the old placement
    /// and reports rolled_back.
    MigrationResult migrate(const flow::DataflowSpec& spec, const std::string& uuid, const flow::PlacementMapping& old_mapping,
                            const flow::PlacementMapping& new_mapping,
                            const std::map<std::string, flow::FragmentDescriptor>& old_fragments,
                            const std::map<std::string, flow::FragmentDescriptor>& new_fragments,
                            const std::map<std::string, std::string>& endpoints, const flow::MigrationSet& diff) const;

  private:
    DeployOptions options_;
};

}// namespace echo::master
