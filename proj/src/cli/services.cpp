// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#include <echo/catalog/catalog_server.hpp>
#include <echo/cli/bench.hpp>
#include <echo/cli/commands.hpp>
#include <echo/cli/testbed.hpp>
#include <echo/common/error.hpp>
#include <echo/common/shutdown.hpp>
#include <echo/common/subprocess.hpp>

#include <spdlog/spdlog.h>

#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include <unistd.h>

namespace echo::cli {

using Json = nlohmann::json;

int run_catalog(catalog::CatalogServerOptions options) {
    Shutdown::install();
    catalog::CatalogServer server(std::move(options));
    const int port = server.start();
    spdlog::info("catalog listening on {}", server.url());
    announce_listening(port);
    Shutdown::wait();
    server.stop();
    server.save_snapshot();
    return 0;
}

namespace {

std::filesystem::path state_file(const TestbedConfig& cfg) { return cfg.workdir / "testbed.json"; }

TestbedConfig with_workdir(TestbedConfig cfg) {
    if (cfg.workdir.empty()) {
        cfg.workdir = std::filesystem::absolute(".echo-testbed");
    }
    return cfg;
}

}// namespace

int cmd_testbed_up(const std::filesystem::path& config) {
    Shutdown::install();
    const auto cfg = with_workdir(TestbedConfig::load(config));
    Testbed tb(cfg);
    try {
        tb.up();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    auto doc = tb.describe();
    doc["pid"] = ::getpid();
    std::ofstream(state_file(cfg)) << doc.dump(2) << '\n';
    std::cout << doc.dump(2) << std::endl;
    std::cout << "export ECHO_MASTER_URL=" << tb.master_url() << "\nexport ECHO_CAT_URL=" << tb.catalog_url() << std::endl;
    Shutdown::wait();
    tb.down();
    std::filesystem::remove(state_file(cfg));
    return 0;
}

int cmd_testbed_down(const std::filesystem::path& config) {
    const auto cfg = with_workdir(TestbedConfig::load(config));
    std::ifstream in(state_file(cfg));
    if (!in) {
        std::cerr << "error: no running testbed recorded in " << state_file(cfg) << "\n";
        return 1;
    }
    const auto pid = Json::parse(in).value("pid", 0);
    if (pid <= 0 || ::kill(pid, SIGTERM) != 0) {
        std::cerr << "error: testbed process " << pid << " is not running\n";
        std::filesystem::remove(state_file(cfg));
        return 1;
    }
    for (int i = 0; i < 300 && ::kill(pid, 0) == 0; ++i) {
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
    if (::kill(pid, 0) == 0) {
        std::cerr << "error: testbed process " << pid << " did not exit\n";
        return 1;
    }
    std::cout << "testbed down\n";
    return 0;
}

int cmd_bench(const std::string& which, const std::filesystem::path& config, const std::filesystem::path& outdir, double duration_s,
              double rate, bool rebalance) {
    BenchOptions opts;
    opts.testbed = TestbedConfig::load(config);
    opts.outdir = outdir;
    opts.duration_s = duration_s;
    opts.rate = rate;
    opts.rebalance = rebalance;
    Json report;
    if (which == "rebalance") {
        report = bench_rebalance(opts);
    } else if (which == "stats") {
        report = bench_stats(opts);
    } else {
        std::cerr << "error: unknown bench '" << which << "'\n";
        return 1;
    }
    Json summary = report;
    summary.erase("sink_rate_series");
    summary.erase("cpu_series");
    summary.erase("final_metrics");
    summary.erase("task_rates");
    std::cout << summary.dump(2) << std::endl;
    const auto failed = failed_verdicts(report);
    for (const auto& f : failed) {
        std::cerr << "verdict failed: " << f << "\n";
    }
    return failed.empty() ? 0 : 1;
}

}// namespace echo::cli
