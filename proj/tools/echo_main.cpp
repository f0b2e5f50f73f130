// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#include <echo/agent/agent.hpp>
#include <echo/catalog/catalog_server.hpp>
#include <echo/cli/commands.hpp>
#include <echo/common/error.hpp>
#include <echo/engine/engine_server.hpp>
#include <echo/master/master.hpp>
#include <echo/wrappers/builtins.hpp>
#include <echo/wrappers/stub_engine.hpp>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <fstream>
#include <iostream>
#include <sstream>

using echo::cli::env_or;

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

std::int64_t env_ms(const char* name, std::int64_t fallback) { return std::stoll(env_or(name, std::to_string(fallback))); }

}// namespace

int main(int argc, char** argv) {
    spdlog::set_level(spdlog::level::from_str(env_or("ECHO_LOG_LEVEL", "info")));
    CLI::App app{"echo: dataflow orchestration over simulated edge, fog and cloud resources"};
    app.require_subcommand(1);

    // Services.
    auto* cat = app.add_subcommand("cat", "run the catalog (resource directory)");
    std::string cat_listen = env_or("ECHO_CAT_LISTEN", "127.0.0.1:7071");
    std::string snapshot;
    std::int64_t heartbeat_ms = 5000;
    cat->add_option("--listen", cat_listen, "host:port")->capture_default_str();
    cat->add_option("--snapshot", snapshot, "JSON snapshot path");
    cat->add_option("--heartbeat-ms", heartbeat_ms, "heartbeat interval used for staleness")->capture_default_str();

    auto* master = app.add_subcommand("master", "run the platform master");
    std::string master_listen = env_or("ECHO_MASTER_LISTEN", "127.0.0.1:7070");
    std::string catalog_url = env_or("ECHO_CAT_URL", "http://127.0.0.1:7071");
    std::string scheduler = "firstfit";
    master->add_option("--listen", master_listen, "host:port")->capture_default_str();
    master->add_option("--catalog", catalog_url, "catalog URL")->capture_default_str();
    master->add_option("--scheduler", scheduler, "scheduler plugin")->capture_default_str();

    auto* agent = app.add_subcommand("agent", "run a device agent");
    std::string agent_config;
    std::string agent_catalog;
    std::string agent_listen;
    agent->add_option("-c,--config", agent_config, "device config JSON")->required();
    agent->add_option("--catalog", agent_catalog, "override catalog URL");
    agent->add_option("--listen", agent_listen, "override listen address");

    auto* engine = app.add_subcommand("engine", "run an engine worker (normally started by an agent)");
    std::string engine_listen = env_or("ECHO_ENGINE_LISTEN", "127.0.0.1:0");
    echo::engine::EngineOptions eo;
    std::string reachable = "*";
    std::string workdir;
    engine->add_option("--listen", engine_listen)->capture_default_str();
    engine->add_option("--worker-id", eo.worker_id);
    engine->add_option("--device", eo.device);
    engine->add_option("--catalog", eo.catalog_url);
    engine->add_option("--cpu-millis", eo.cpu_millis);
    engine->add_option("--mem-mb", eo.mem_mb);
    engine->add_option("--profile", eo.profile);
    engine->add_option("--reachable-from", reachable, "comma-separated device ids or *");
    engine->add_option("--workdir", workdir);

    auto* stub = app.add_subcommand("stub-engine", "run a stub remote engine for the bridge wrapper");
    std::string stub_listen = "127.0.0.1:0";
    std::string stub_mode = "echo";
    stub->add_option("--listen", stub_listen)->capture_default_str();
    stub->add_option("--mode", stub_mode, "echo or double")->capture_default_str();

    // Client commands.
    std::string master_url = env_or("ECHO_MASTER_URL", "http://127.0.0.1:7070");
    std::string uuid;
    auto* submit = app.add_subcommand("submit", "submit a dataflow");
    std::string flow_file;
    submit->add_option("-f,--file", flow_file, "dataflow JSON")->required();
    submit->add_option("--master", master_url)->capture_default_str();
    auto* status = app.add_subcommand("status", "show a dataflow");
    bool status_json = false;
    status->add_option("uuid", uuid)->required();
    status->add_option("--master", master_url);
    status->add_flag("--json", status_json);
    auto* stop = app.add_subcommand("stop", "stop a dataflow");
    stop->add_option("uuid", uuid)->required();
    stop->add_option("--master", master_url);
    auto* rebalance = app.add_subcommand("rebalance", "rebalance a dataflow");
    rebalance->add_option("uuid", uuid)->required();
    rebalance->add_option("--master", master_url);
    auto* list = app.add_subcommand("list", "list dataflows");
    list->add_option("--master", master_url);

    auto* testbed = app.add_subcommand("testbed", "boot or tear down a local testbed");
    std::string tb_action;
    std::string tb_config = "configs/testbed-default.json";
    testbed->add_option("action", tb_action, "up or down")->required()->check(CLI::IsMember({"up", "down"}));
    testbed->add_option("-c,--config", tb_config)->capture_default_str();

    auto* bench = app.add_subcommand("bench", "run a benchmark on a fresh testbed");
    std::string bench_kind;
    std::string bench_config = "configs/testbed-default.json";
    std::string bench_out = "bench-out";
    double bench_duration = 60;
    double bench_rate = 0;
    bool no_rebalance = false;
    bench->add_option("kind", bench_kind, "rebalance or stats")->required()->check(CLI::IsMember({"rebalance", "stats"}));
    bench->add_option("-c,--config", bench_config)->capture_default_str();
    bench->add_option("-o,--out", bench_out)->capture_default_str();
    bench->add_option("--duration", bench_duration, "seconds")->capture_default_str();
    bench->add_option("--rate", bench_rate, "source records per second (0: bench default)");
    bench->add_flag("--no-rebalance", no_rebalance, "control run without the rebalance");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*cat) {
            echo::catalog::CatalogServerOptions o;
            o.listen = cat_listen;
            o.snapshot = snapshot;
            o.heartbeat = std::chrono::milliseconds(heartbeat_ms);
            return echo::cli::run_catalog(o);
        }
        if (*master) {
            echo::master::MasterOptions o;
            o.catalog_url = catalog_url;
            o.scheduler = scheduler;
            o.deploy.fault_delay = std::chrono::milliseconds(env_ms("ECHO_FAULT_DELAY_MS", 0));
            return echo::master::run_master(o, master_listen);
        }
        if (*agent) {
            std::ifstream in(agent_config);
            if (!in) {
                std::cerr << "error: cannot read " << agent_config << "\n";
                return 1;
            }
            auto cfg = echo::agent::AgentConfig::from_json(nlohmann::json::parse(in));
            if (!agent_catalog.empty()) {
                cfg.catalog_url = agent_catalog;
            }
            if (cfg.catalog_url.empty()) {
                cfg.catalog_url = catalog_url;
            }
            if (!agent_listen.empty()) {
                cfg.listen = agent_listen;
            }
            return echo::agent::run_agent(cfg);
        }
        if (*engine) {
            eo.reachable_from = split_csv(reachable);
            eo.workdir = workdir.empty() ? std::filesystem::temp_directory_path() / ("echo-engine-" + eo.worker_id) : std::filesystem::path(workdir);
            eo.metrics_interval = std::chrono::milliseconds(env_ms("ECHO_METRICS_INTERVAL_MS", 5000));
            echo::engine::ProcessorRegistry registry;
            echo::wrappers::register_all(registry);
            return echo::engine::run_engine(eo, engine_listen, registry);
        }
        if (*stub) {
            return echo::wrappers::run_stub_engine(stub_listen, stub_mode);
        }
        if (*submit) {
            return echo::cli::cmd_submit(master_url, flow_file);
        }
        if (*status) {
            return echo::cli::cmd_status(master_url, uuid, status_json);
        }
        if (*stop) {
            return echo::cli::cmd_stop(master_url, uuid);
        }
        if (*rebalance) {
            return echo::cli::cmd_rebalance(master_url, uuid);
        }
        if (*list) {
            return echo::cli::cmd_list(master_url);
        }
        if (*testbed) {
            return tb_action == "up" ? echo::cli::cmd_testbed_up(tb_config) : echo::cli::cmd_testbed_down(tb_config);
        }
        if (*bench) {
            return echo::cli::cmd_bench(bench_kind, bench_config, bench_out, bench_duration, bench_rate, !no_rebalance);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
