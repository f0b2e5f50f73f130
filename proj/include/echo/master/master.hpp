// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <echo/catalog/catalog_client.hpp>
#include <echo/master/deployer.hpp>
#include <echo/master/scheduler.hpp>
#include <echo/master/store.hpp>

#include <json.hpp>

#include <memory>
#include <string>

namespace echo::master {

struct MasterOptions {
    std::string catalog_url;
    std::string scheduler = "firstfit";
    std::chrono::milliseconds lock_ttl{300000};
    DeployOptions deploy;///< fault_delay defaults from ECHO_FAULT_DELAY_MS
};

/// The platform master. Each call is an independent App Manager run: it reads
/// what it needs from the catalog and writes results back.
class Master {
  public:
    explicit Master(MasterOptions options);

    /// Throws ValidationError/ParseError for a bad spec, Conflict for an
    /// infeasible schedule, UnreachableError when a worker rejects deployment.
    std::string start(std::string_view spec_json);
    /// Throws NotFound, Conflict when not running/failed.
    nlohmann::json stop(const std::string& uuid);
    /// Returns {"mapping","moved","affected",...}. Throws Conflict when the
    /// new schedule is infeasible (the dataflow is left untouched).
    nlohmann::json rebalance(const std::string& uuid);
    /// Record plus a per-processor metrics summary.
    nlohmann::json describe(const std::string& uuid) const;
    nlohmann::json list() const;

    const catalog::CatalogClient& catalog() const noexcept { return catalog_; }

  private:
    MasterOptions options_;
    catalog::CatalogClient catalog_;
    RecordStore store_;
    std::unique_ptr<SchedulerPlugin> scheduler_;
    Deployer deployer_;
    std::string owner_;
};

/// Runs the master REST service until SIGTERM:
///   POST /dataflows -> {"uuid"}, GET /dataflows, GET|DELETE /dataflows/{uuid},
///   POST /dataflows/{uuid}/rebalance -> {"mapping",...}, GET /health.
/// Registers itself at /service/master.
int run_master(MasterOptions options, const std::string& listen);

}// namespace echo::master
