// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <echo/catalog/catalog.hpp>
#include <echo/common/proc_stats.hpp>
#include <echo/common/throttle.hpp>
#include <echo/engine/links.hpp>
#include <echo/engine/processor.hpp>
#include <echo/engine/processor_runtime.hpp>
#include <echo/flowmodel/partition.hpp>

#include <json.hpp>

#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <shared_mutex>
#include <string>
#include <thread>

namespace echo::engine {

struct EngineOptions {
    std::string worker_id = "local";
    std::string device = "local";
    std::string catalog_url;///< empty disables metrics reporting
    std::int64_t cpu_millis = 1000;
    std::int64_t mem_mb = 512;
    std::string profile = "unthrottled";
    std::set<std::string> reachable_from{"*"};
    std::filesystem::path workdir;
    std::chrono::milliseconds metrics_interval{5000};
    std::size_t queue_capacity = EdgeQueue::kDefaultCapacity;
};

/// Hosts fragments of any number of dataflows. A fragment is identified by its
/// dataflow uuid; one engine holds at most one fragment per dataflow.
class Engine {
  public:
    Engine(EngineOptions options, const ProcessorRegistry& registry);
    ~Engine();

    Engine(const Engine&) = delete;
    Engine& operator=(const Engine&) = delete;

    const EngineOptions& options() const noexcept { return options_; }

    /// Builds queues, links and processors; nothing runs until start().
    /// Throws Conflict for a duplicate fragment and ValidationError for an
    /// unknown processor kind.
    void deploy(const flow::FragmentDescriptor& desc);
    /// Starts links and every processor not listed as paused.
    void start(const std::string& fragment);
    bool pause(const std::string& fragment, const std::string& processor);
    void resume(const std::string& fragment, const std::string& processor);
    /// Stops everything and returns the queued batch counts left behind.
    nlohmann::json undeploy(const std::string& fragment);
    /// Reconciles a live fragment with a new descriptor: removes processors,
    /// edges and links that disappeared, adds new ones (paused when listed in
    /// desc.paused), and keeps queues whose edge survives on this side. Throws
    /// Conflict when a queue that would be dropped still holds batches.
    void rewire(const flow::FragmentDescriptor& desc);

    nlohmann::json queues(const std::string& fragment) const;
    std::vector<data::DataBatch> take(const std::string& fragment, const std::string& edge_key);
    void inject(const std::string& fragment, const std::string& edge_key, std::vector<data::DataBatch> batches);

    nlohmann::json fragment_metrics(const std::string& fragment) const;
    nlohmann::json list() const;
    bool has_fragment(const std::string& fragment) const;

    RemoteLink::Receipt link_receive(const std::string& link_id, const data::DataBatch& batch);
    std::vector<data::DataBatch> link_serve(const std::string& link_id, std::size_t max, std::chrono::milliseconds wait);
    std::size_t link_ack(const std::string& link_id, const std::set<std::string>& ids);

    /// Firewall shim: may `device` open a data connection to this engine?
    bool admits(const std::string& device) const;

    /// Starts the periodic metrics reporter (no-op without a catalog URL).
    void start_metrics();
    void set_self_url(std::string url) { self_url_ = std::move(url); }
    /// Builds and (if possible) publishes one metrics sample. Returns it.
    nlohmann::json report_metrics();
    std::size_t buffered_samples() const;

    void shutdown();

  private:
    struct Fragment;

    std::shared_ptr<Fragment> find(const std::string& fragment) const;
    std::shared_ptr<RemoteLink> find_link(const std::string& link_id) const;
    void apply(Fragment& frag, const flow::FragmentDescriptor& desc, bool initial);
    void index_links();
    void metrics_loop();

    EngineOptions options_;
    const ProcessorRegistry& registry_;
    Throttle throttle_;
    std::string self_url_;

    mutable std::shared_mutex mu_;
    std::map<std::string, std::shared_ptr<Fragment>> fragments_;
    std::map<std::string, std::shared_ptr<RemoteLink>> links_;

    mutable std::mutex metrics_mu_;
    std::condition_variable metrics_cv_;
    bool metrics_stop_ = false;
    std::thread metrics_thread_;
    std::deque<std::vector<catalog::CatalogItem>> pending_;
    CpuMeter cpu_meter_;
    std::map<std::string, std::pair<std::chrono::steady_clock::time_point, nlohmann::json>> last_counts_;
};

}// namespace echo::engine
