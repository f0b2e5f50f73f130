// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any selected criterion fails.

#include "support/oracles.hpp"

#include <echo/catalog/catalog_client.hpp>
#include <echo/cli/bench.hpp>
#include <echo/cli/testbed.hpp>
#include <echo/common/error.hpp>
#include <echo/databatch/wrappers.hpp>
#include <echo/engine/engine.hpp>
#include <echo/engine/engine_server.hpp>
#include <echo/master/scheduler.hpp>
#include <echo/net/http.hpp>
#include <echo/wrappers/builtins.hpp>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <thread>

using namespace echo;
using Json = nlohmann::json;
using Clock = std::chrono::steady_clock;
using namespace std::chrono_literals;
namespace fs = std::filesystem;

namespace {

// Pinned limits.
constexpr double kRoundTripBudgetS = 60;
constexpr double kGraphBudgetS = 30;
constexpr double kSchedulerBudgetS = 60;
constexpr double kPlacementBudgetS = 180;
constexpr double kPauseBudgetS = 60;
constexpr double kRebalanceBudgetS = 300;
constexpr double kFirewallBudgetS = 120;
constexpr double kStatelessBudgetS = 120;
constexpr double kStatsBudgetS = 180;
constexpr double kLivenessBudgetS = 60;

constexpr std::size_t kPauseExpected = 500;///< 50 ev/s for 10 s, one tuple per batch
constexpr double kPauseTolerance = 0.10;
constexpr auto kStaleDeadline = 15s;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int prec = 2) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(prec);
    out << v;
    return out.str();
}

fs::path scratch_root() {
    static const fs::path root = [] {
        auto p = fs::temp_directory_path() / ("echo-acceptance-" + std::to_string(::getpid()));
        fs::create_directories(p);
        return p;
    }();
    return root;
}

fs::path fresh_dir(const std::string& name) {
    auto p = scratch_root() / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

fs::path source_dir() {
    return fs::path(ECHO_SOURCE_DIR);
}

template<typename Pred>
bool wait_until(Pred pred, std::chrono::milliseconds timeout, std::chrono::milliseconds step = 100ms) {
    const auto deadline = Clock::now() + timeout;
    while (Clock::now() < deadline) {
        if (pred()) {
            return true;
        }
        std::this_thread::sleep_for(step);
    }
    return pred();
}

const engine::ProcessorRegistry& registry() {
    static const engine::ProcessorRegistry r = [] {
        engine::ProcessorRegistry reg;
        wrappers::register_all(reg);
        return reg;
    }();
    return r;
}

flow::ProcessorSpec proc(std::string id, std::string kind, Json config, flow::DataModel in, flow::DataModel out) {
    flow::ProcessorSpec p;
    p.id = std::move(id);
    p.kind = std::move(kind);
    p.config = std::move(config);
    p.input_model = in;
    p.output_model = out;
    return p;
}

/// One SenML record per line, one entry per record, distinct values.
fs::path write_records(const fs::path& path, std::size_t n) {
    std::ofstream out(path);
    for (std::size_t i = 0; i < n; ++i) {
        out << R"({"bn":"urn:dev:s)" << i % 13 << R"(:","bt":)" << 1500000000000 + i << R"(,"e":[{"n":"v","u":"Cel","v":)" << i
            << "}]}\n";
    }
    return path;
}

std::vector<std::string> sorted_lines(const fs::path& path) {
    std::vector<std::string> out;
    std::ifstream in(path);
    for (std::string line; std::getline(in, line);) {
        if (!line.empty()) {
            out.push_back(line);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string verdict_detail(const Json& report) {
    std::string out;
    const auto verdicts = report.value("verdicts", Json::object());
    for (const auto& [k, v] : verdicts.items()) {
        out += (out.empty() ? "" : " ") + k + "=" + (v.get<bool>() ? "ok" : "FAILED");
    }
    return out;
}

// 1 -------------------------------------------------------------------------

Outcome wrapper_round_trips() {
    const auto t0 = Clock::now();
    const auto dir = fresh_dir("c1");
    std::mt19937 rng(2026);
    std::uniform_int_distribution<std::size_t> length(0, 10'000);
    std::size_t stream_failures = 0;
    std::size_t file_failures = 0;
    std::size_t batches = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto events = echo::testing::random_tuples(rng, length(rng));
        // Mix small and large windows so both many-batch and single-batch cases occur.
        const std::size_t n = rng() % 2 ? 1 + rng() % 100 : 1 + rng() % 20'000;
        const auto out = data::stream_to_batch(events, data::WindowPolicy::count(n));
        std::vector<data::EventTuple> replay;
        replay.reserve(events.size());
        for (const auto& b : out) {
            const auto part = data::batch_to_stream(b);
            replay.insert(replay.end(), part.begin(), part.end());
            const auto ref = data::batch_to_file(b, dir);
            if (!(data::file_to_batch(ref) == b)) {
                ++file_failures;
            }
            data::remove_batch_file(ref.path);
            ++batches;
        }
        if (replay != events) {
            ++stream_failures;
        }
    }
    const double elapsed = seconds_since(t0);
    const bool pass = stream_failures == 0 && file_failures == 0 && elapsed < kRoundTripBudgetS;
    return {pass, "1000 sequences, " + std::to_string(batches) + " batches, stream mismatches " + std::to_string(stream_failures) +
                      ", file mismatches " + std::to_string(file_failures) + ", " + fmt(elapsed) + " s"};
}

// 2 -------------------------------------------------------------------------

Outcome graph_oracles() {
    const auto t0 = Clock::now();
    std::mt19937 rng(7);
    std::size_t mismatches = 0;
    std::size_t cycle_graphs = 0;
    for (int i = 0; i < 500; ++i) {
        const std::size_t n = 1 + rng() % 50;
        const auto spec = echo::testing::random_graph(rng, n, 3 * n);
        const auto resources = 1 + rng() % 6;
        const auto a = echo::testing::random_mapping(rng, spec, resources);
        const auto b = echo::testing::random_mapping(rng, spec, resources);

        const auto plan = flow::edge_cut(spec, a, flow::Reachability{}, "g");
        std::multiset<echo::testing::EdgeTuple> cut;
        for (const auto& e : plan.cut_edges) {
            cut.insert({e.from, e.to});
        }
        bool ok = cut == echo::testing::oracle_cut(spec, a);

        // Fragment union must give back every processor exactly once and every edge.
        std::multiset<std::string> procs;
        std::multiset<echo::testing::EdgeTuple> edges;
        for (const auto& [r, f] : plan.fragments) {
            for (const auto& p : f.processors) {
                procs.insert(p);
                ok &= a.assignments.at(p) == r;
            }
            for (const auto& e : f.internal_edges) {
                edges.insert({e.from, e.to});
            }
        }
        edges.insert(cut.begin(), cut.end());
        std::multiset<std::string> all_procs;
        for (const auto& p : spec.processors) {
            all_procs.insert(p.id);
        }
        std::multiset<echo::testing::EdgeTuple> all_edges;
        for (const auto& e : spec.edges) {
            all_edges.insert({e.from, e.to});
        }
        ok &= procs == all_procs && edges == all_edges;

        ok &= flow::graph_diff(spec, a, b) == echo::testing::oracle_diff(spec, a, b);
        ok &= flow::graph_diff(spec, a, a).moved.empty();
        cycle_graphs += plan.warnings.empty() ? 0 : 1;
        mismatches += ok ? 0 : 1;
    }
    const double elapsed = seconds_since(t0);
    return {mismatches == 0 && elapsed < kGraphBudgetS, "500 graphs, mismatches " + std::to_string(mismatches) + ", " +
                                                            std::to_string(cycle_graphs) + " with cut cycles, " + fmt(elapsed) + " s"};
}

// 3 -------------------------------------------------------------------------

Outcome scheduler_soundness() {
    const auto t0 = Clock::now();
    std::mt19937 rng(31);
    const master::FirstFitScheduler scheduler;
    std::size_t accepted = 0;
    std::size_t unsound = 0;
    std::size_t rejected_feasible = 0;
    std::size_t rejected_infeasible = 0;
    for (int i = 0; i < 500; ++i) {
        const std::size_t n = 1 + rng() % 6;
        auto spec = echo::testing::random_graph(rng, n, 2 * n);
        for (auto& p : spec.processors) {
            p.demands.cpu_millis = 250 * static_cast<std::int64_t>(rng() % 9);
            p.demands.mem_mb = 64 * static_cast<std::int64_t>(rng() % 5);
            if (rng() % 6 == 0) {
                p.constraints = {"gpu"};
            }
        }
        master::ResourceView view;
        const auto k = 1 + rng() % 4;
        for (std::size_t w = 0; w < k; ++w) {
            master::WorkerView v;
            v.id = "r" + std::to_string(w);
            v.device = v.id;
            v.cpu_millis = 500 * static_cast<std::int64_t>(1 + rng() % 8);
            v.mem_mb = 128 * static_cast<std::int64_t>(1 + rng() % 4);
            v.allotted_cpu = 250 * static_cast<std::int64_t>(rng() % 2);
            v.tags = {"edge"};
            if (rng() % 3 == 0) {
                v.tags.insert("gpu");
            }
            view.workers.push_back(v);
        }
        const auto exhaustive = echo::testing::exhaustive_schedule(spec, view);
        try {
            const auto m = scheduler.schedule(spec, view, nullptr);
            ++accepted;
            if (!master::validate_schedule(spec, view, m).empty() || !echo::testing::oracle_sound(spec, view, m) || !exhaustive) {
                ++unsound;
            }
        } catch (const Conflict&) {
            ++(exhaustive ? rejected_feasible : rejected_infeasible);
        }
    }
    const double elapsed = seconds_since(t0);
    return {unsound == 0 && accepted > 0 && elapsed < kSchedulerBudgetS,
            "500 instances, accepted " + std::to_string(accepted) + ", unsound " + std::to_string(unsound) + ", rejected " +
                std::to_string(rejected_infeasible) + " infeasible + " + std::to_string(rejected_feasible) +
                " feasible (first-fit is greedy), " + fmt(elapsed) + " s"};
}

// 4 -------------------------------------------------------------------------

struct PlacementRun {
    std::uint64_t sink = 0;
    std::vector<std::string> lines;
    std::string directions;
};

/// Five processors over three in-process engines. `accept[w]` lists who may
/// connect to w; absent means anyone.
PlacementRun run_placement(const fs::path& dir, const fs::path& input, const std::string& label,
                           const std::map<std::string, std::set<std::string>>& accept) {
    const std::vector<std::string> workers = {"w0", "w1", "w2"};
    std::map<std::string, std::unique_ptr<engine::Engine>> engines;
    std::map<std::string, std::unique_ptr<engine::EngineServer>> servers;
    std::map<std::string, std::string> endpoints;
    flow::Reachability reach;
    for (const auto& w : workers) {
        engine::EngineOptions o;
        o.worker_id = w;
        o.device = w;
        o.workdir = dir / label / w;
        const auto it = accept.find(w);
        if (it != accept.end()) {
            o.reachable_from = it->second;
            reach.accept_from(w, it->second);
        }
        reach.set_device(w, w);
        engines[w] = std::make_unique<engine::Engine>(o, registry());
        servers[w] = std::make_unique<engine::EngineServer>(*engines[w]);
        servers[w]->start("127.0.0.1:0");
        endpoints[w] = servers[w]->url();
    }

    const auto sink_path = dir / (label + "-sink.jsonl");
    using flow::DataModel;
    flow::DataflowSpec spec;
    spec.name = "linear";
    spec.processors = {
        proc("source", "builtin:source_replay", {{"file", input.string()}, {"window", {{"mode", "count"}, {"n", 50}}}}, DataModel::stream,
             DataModel::microbatch),
        proc("a", "builtin:identity", Json::object(), DataModel::microbatch, DataModel::microbatch),
        proc("b", "cep", {{"stages", Json::array({{{"op", "scale"}, {"factor", 1.0}}})}, {"window", {{"mode", "count"}, {"n", 7}}}},
             DataModel::stream, DataModel::stream),
        proc("c", "builtin:identity", Json::object(), DataModel::microbatch, DataModel::microbatch),
        proc("sink", "builtin:sink_file", {{"path", sink_path.string()}}, DataModel::microbatch, DataModel::microbatch)};
    spec.edges = {{"source", "a"}, {"a", "b"}, {"b", "c"}, {"c", "sink"}};
    const flow::PlacementMapping mapping{{{"source", "w0"}, {"a", "w1"}, {"b", "w2"}, {"c", "w0"}, {"sink", "w1"}}};
    const auto plan = flow::edge_cut(spec, mapping, reach, label);

    PlacementRun run;
    for (const auto& e : plan.cut_edges) {
        run.directions += std::string(run.directions.empty() ? "" : ",") + std::string(flow::to_string(e.direction));
    }
    const auto descs = flow::build_descriptors(spec, plan, label, endpoints);
    for (const auto& [w, d] : descs) {
        engines.at(w)->deploy(d);
    }
    for (const auto& [w, d] : descs) {
        engines.at(w)->start(label);
    }
    auto& sink_engine = *engines.at("w1");
    const auto count = [&] {
        return sink_engine.fragment_metrics(label)["processors"]["sink"]["logic"].value("tuples", std::uint64_t{0});
    };
    wait_until([&] { return count() >= 10'000; }, 120s);
    std::this_thread::sleep_for(500ms);
    run.sink = count();
    for (auto& [w, s] : servers) {
        s->stop();
    }
    for (auto& [w, e] : engines) {
        e->shutdown();
    }
    run.lines = sorted_lines(sink_path);
    return run;
}

Outcome placement_conservation() {
    const auto t0 = Clock::now();
    const auto dir = fresh_dir("c4");
    const auto input = write_records(dir / "in.jsonl", 10'000);
    // Cut edges: w0->w1, w1->w2, w2->w0, w0->w1.
    const auto push = run_placement(dir, input, "push", {});
    const auto pull = run_placement(dir, input, "pull", {{"w0", {"w1"}}, {"w1", {"w2"}}, {"w2", {"w0"}}});
    const auto mixed = run_placement(dir, input, "mixed", {{"w1", {"w2"}}});
    const double elapsed = seconds_since(t0);
    const bool counts = push.sink == 10'000 && pull.sink == 10'000 && mixed.sink == 10'000;
    const bool same = push.lines.size() == 10'000 && push.lines == pull.lines && push.lines == mixed.lines;
    const bool directions = push.directions == "push,push,push,push" && pull.directions == "pull,pull,pull,pull" &&
                            mixed.directions.find("push") != std::string::npos && mixed.directions.find("pull") != std::string::npos;
    return {counts && same && directions && elapsed < kPlacementBudgetS,
            "sinks push=" + std::to_string(push.sink) + " [" + push.directions + "] pull=" + std::to_string(pull.sink) + " [" +
                pull.directions + "] mixed=" + std::to_string(mixed.sink) + " [" + mixed.directions + "], multisets " +
                (same ? "identical" : "DIFFER") + ", " + fmt(elapsed) + " s"};
}

// 5 -------------------------------------------------------------------------

Outcome pause_queues() {
    const auto t0 = Clock::now();
    const auto dir = fresh_dir("c5");
    const auto input = write_records(dir / "in.jsonl", 1000);
    engine::EngineOptions o;
    o.worker_id = "w";
    o.workdir = dir / "w";
    engine::Engine eng(o, registry());

    using flow::DataModel;
    flow::DataflowSpec spec;
    spec.name = "pause";
    spec.processors = {proc("source", "builtin:source_replay",
                            {{"file", input.string()}, {"rate", 50}, {"window", {{"mode", "count"}, {"n", 1}}}}, DataModel::stream,
                            DataModel::microbatch),
                       proc("mid", "builtin:identity", Json::object(), DataModel::microbatch, DataModel::microbatch),
                       proc("sink", "builtin:sink_count", Json::object(), DataModel::microbatch, DataModel::microbatch)};
    spec.edges = {{"source", "mid"}, {"mid", "sink"}};
    const flow::PlacementMapping m{{{"source", "w"}, {"mid", "w"}, {"sink", "w"}}};
    const auto plan = flow::edge_cut(spec, m, flow::Reachability{}, "pause");
    eng.deploy(flow::build_descriptors(spec, plan, "pause", {{"w", ""}}).at("w"));
    eng.start("pause");

    const auto depth = [&] { return eng.queues("pause")["in"]["source->mid"]["depth"].get<std::size_t>(); };
    const auto metrics = [&] { return eng.fragment_metrics("pause")["processors"]; };
    std::this_thread::sleep_for(2s);
    eng.pause("pause", "mid");
    const auto d0 = depth();
    const auto sink0 = metrics()["sink"]["logic"].value("tuples", std::uint64_t{0});
    std::this_thread::sleep_for(10s);
    const auto d1 = depth();
    const auto sink1 = metrics()["sink"]["logic"].value("tuples", std::uint64_t{0});
    eng.resume("pause", "mid");
    wait_until([&] { return metrics()["sink"]["logic"].value("tuples", std::uint64_t{0}) >= 1000; }, 40s);
    const auto emitted = metrics()["source"]["logic"].value("records_emitted", std::uint64_t{0});
    const auto delivered = metrics()["sink"]["logic"].value("tuples", std::uint64_t{0});
    eng.shutdown();

    const auto growth = d1 >= d0 ? d1 - d0 : 0;
    const double lo = kPauseExpected * (1 - kPauseTolerance);
    const double hi = kPauseExpected * (1 + kPauseTolerance);
    const bool grew = growth >= lo && growth <= hi;
    const bool frozen = sink1 == sink0;
    const bool conserved = emitted == 1000 && delivered == emitted;
    const double elapsed = seconds_since(t0);
    return {grew && frozen && conserved && elapsed < kPauseBudgetS,
            "queue growth " + std::to_string(growth) + " in [" + fmt(lo, 0) + ", " + fmt(hi, 0) + "], sink frozen " +
                (frozen ? "yes" : "no") + ", emitted " + std::to_string(emitted) + " delivered " + std::to_string(delivered) + ", " +
                fmt(elapsed) + " s"};
}

// 6 and 9 ---------------------------------------------------------------------

Outcome run_bench(bool rebalance_bench, const std::string& config, double budget) {
    const auto t0 = Clock::now();
    cli::BenchOptions o;
    o.testbed = cli::TestbedConfig::load(source_dir() / "configs" / config);
    o.outdir = fresh_dir(rebalance_bench ? "c6" : "c9");
    o.echo_binary = ECHO_BIN;
    o.duration_s = 60;
    const auto report = rebalance_bench ? cli::bench_rebalance(o) : cli::bench_stats(o);
    const bool verdicts_ok = cli::failed_verdicts(report).empty() && report.contains("verdicts");
    const double elapsed = seconds_since(t0);
    std::string detail = verdict_detail(report);
    if (rebalance_bench) {
        detail += ", before " + fmt(report.value("rate_before", 0.0)) + "/s after " + fmt(report.value("rate_after", 0.0)) +
                  "/s ratio " + fmt(report.value("rate_ratio", 0.0)) + ", min bucket " + fmt(report.value("dip_min_bucket", 0.0)) +
                  " (needs < " + fmt(cli::kDipFraction * report.value("rate_before", 0.0)) + "), longest sink gap " +
                  fmt(report.value("max_sink_gap_s", 0.0)) + " s";
    } else {
        detail += ", sustained " + fmt(report.value("sustained_fraction", 0.0) * 100, 1) + "% of input";
    }
    detail += ", sink " + std::to_string(report.value("sink_tuples", std::uint64_t{0})) + "/" +
              std::to_string(report.value("source_tuples", std::uint64_t{0})) + ", " + fmt(elapsed) + " s";
    return {verdicts_ok && elapsed < budget, detail};
}

// 7 ---------------------------------------------------------------------------

Json load_flow(const std::string& name, const fs::path& sink) {
    std::ifstream in(source_dir() / "dataflows" / name);
    auto spec = Json::parse(in);
    for (auto& p : spec["processors"]) {
        auto& cfg = p["config"];
        if (cfg.contains("file")) {
            cfg["file"] = (source_dir() / cfg["file"].get<std::string>()).string();
        }
        if (cfg.contains("path")) {
            cfg["path"] = sink.string();
        }
    }
    return spec;
}

std::uint64_t expected_tuples(const fs::path& senml) {
    std::uint64_t n = 0;
    std::ifstream in(senml);
    for (std::string line; std::getline(in, line);) {
        if (!line.empty()) {
            n += wrappers::parse_senml_record(line).size();
        }
    }
    return n;
}

std::uint64_t line_count(const fs::path& path) {
    std::ifstream in(path);
    std::uint64_t n = 0;
    for (std::string line; std::getline(in, line);) {
        n += line.empty() ? 0 : 1;
    }
    return n;
}

Outcome firewall_traversal() {
    const auto t0 = Clock::now();
    const auto dir = fresh_dir("c7");
    auto cfg = cli::TestbedConfig::load(source_dir() / "configs" / "testbed-firewall.json");
    cfg.workdir = dir / "testbed";
    cli::Testbed tb(cfg, cli::TestbedOptions{.echo_binary = ECHO_BIN});
    tb.up();
    const auto sink = dir / "sink.jsonl";
    const auto spec = load_flow("firewall.json", sink);
    const auto expected = expected_tuples(source_dir() / "data" / "senml-sample.jsonl");

    net::HttpClient master(tb.master_url(), {2s, 60s});
    const auto submitted = master.post_json("/dataflows", spec);
    if (!submitted.ok()) {
        tb.down();
        return {false, "submit failed: " + submitted.message()};
    }
    const auto uuid = submitted.json()["uuid"].get<std::string>();
    const auto status = master.get("/dataflows/" + uuid).json();
    std::string directions;
    for (const auto& e : status["plan"].value("cut_edges", Json::array())) {
        directions += (directions.empty() ? "" : ",") + e.value("from", "") + "->" + e.value("to", "") + ":" + e.value("direction", "");
    }
    wait_until([&] { return line_count(sink) >= expected; }, 90s, 250ms);
    std::this_thread::sleep_for(1s);
    const auto delivered = line_count(sink);
    master.del("/dataflows/" + uuid);
    tb.down();
    const bool pulled = directions.find(":pull") != std::string::npos;
    const double elapsed = seconds_since(t0);
    return {pulled && delivered == expected && elapsed < kFirewallBudgetS,
            "cut edges [" + directions + "], delivered " + std::to_string(delivered) + "/" + std::to_string(expected) + ", " +
                fmt(elapsed) + " s"};
}

// 8 ---------------------------------------------------------------------------

Outcome master_statelessness() {
    const auto t0 = Clock::now();
    const auto dir = fresh_dir("c8");
    auto cfg = cli::TestbedConfig::load(source_dir() / "configs" / "testbed-default.json");
    cfg.workdir = dir / "testbed";
    cli::Testbed tb(cfg, cli::TestbedOptions{.echo_binary = ECHO_BIN, .defer_classes = {"cloud"}});
    tb.up();
    const auto sink = dir / "sink.jsonl";
    auto spec = load_flow("etl.json", sink);
    spec["qos"]["prefer_class"] = "cloud";
    for (auto& p : spec["processors"]) {
        if (p["id"] == "source") {
            p["config"]["loop"] = false;
            p["config"]["rate"] = 100;
        }
        if (p["config"].contains("path")) {
            p["config"]["path"] = (dir / (p["id"].get<std::string>() + ".jsonl")).string();
        }
    }

    const auto submitted = net::HttpClient(tb.master_url(), {2s, 60s}).post_json("/dataflows", spec);
    if (!submitted.ok()) {
        tb.down();
        return {false, "submit failed: " + submitted.message()};
    }
    const auto uuid = submitted.json()["uuid"].get<std::string>();
    std::this_thread::sleep_for(3s);
    tb.kill_master(SIGKILL);
    tb.start_master();
    tb.spawn_workers("cloud");

    net::HttpClient master(tb.master_url(), {2s, 120s});
    const auto r = master.post("/dataflows/" + uuid + "/rebalance", "{}");
    const auto body = r.ok() ? r.json() : Json::object();
    const auto after = master.get("/dataflows/" + uuid).json();
    std::size_t on_cloud = 0;
    const auto mapping = after.value("mapping", Json::object());
    for (const auto& [pid, w] : mapping.items()) {
        on_cloud += w.get<std::string>().rfind("cloud", 0) == 0 ? 1 : 0;
    }

    // Both sinks see every record once the source finishes.
    const auto expected = expected_tuples(source_dir() / "data" / "senml-sample.jsonl");
    const auto publish = dir / "publish.jsonl";
    const auto store = dir / "store.jsonl";
    wait_until([&] { return line_count(publish) >= expected && line_count(store) >= expected; }, 60s, 250ms);
    std::this_thread::sleep_for(1s);
    const auto got_publish = line_count(publish);
    const auto got_store = line_count(store);
    master.del("/dataflows/" + uuid);
    tb.down();

    const bool rebalanced = r.ok() && !body.value("noop", false) && on_cloud > 0;
    const double elapsed = seconds_since(t0);
    return {rebalanced && got_publish == expected && got_store == expected && elapsed < kStatelessBudgetS,
            "rebalance via fresh master " + std::string(r.ok() ? "ok" : "failed (" + std::to_string(r.status) + ")") + ", " +
                std::to_string(on_cloud) + " processors on cloud, sinks " + std::to_string(got_publish) + "/" + std::to_string(got_store) +
                " of " + std::to_string(expected) + ", " + fmt(elapsed) + " s"};
}

// 10 --------------------------------------------------------------------------

Outcome liveness() {
    const auto t0 = Clock::now();
    const auto dir = fresh_dir("c10");
    auto cfg = cli::TestbedConfig::load(source_dir() / "configs" / "testbed-firewall.json");
    cfg.workdir = dir / "testbed";
    cli::Testbed tb(cfg, cli::TestbedOptions{.echo_binary = ECHO_BIN});
    tb.up();
    const auto pids = tb.worker_pids();
    if (pids.empty()) {
        tb.down();
        return {false, "no workers"};
    }
    const auto& [worker, pid] = *pids.begin();
    catalog::CatalogClient catalog(tb.catalog_url());
    ::kill(pid, SIGKILL);
    const auto killed = Clock::now();
    std::string flag;
    wait_until(
        [&] {
            const auto item = catalog.get("/worker/" + worker);
            if (item && item->value_or(catalog::rel::kStale, "false") == "true") {
                flag = "stale";
            } else if (item && item->value_or(catalog::rel::kState, "") == "down") {
                flag = "down";
            }
            return !flag.empty();
        },
        std::chrono::duration_cast<std::chrono::milliseconds>(kStaleDeadline), 200ms);
    const double after = seconds_since(killed);
    tb.down();
    const double elapsed = seconds_since(t0);
    return {!flag.empty() && elapsed < kLivenessBudgetS,
            "worker " + worker + " " + (flag.empty() ? "not flagged" : "flagged " + flag) + " after " + fmt(after) + " s (limit " +
                std::to_string(kStaleDeadline.count()) + " s), " + fmt(elapsed) + " s"};
}

struct Criterion {
    int number;
    const char* name;
    std::function<Outcome()> run;
};

}// namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance checks"};
    std::vector<int> only;
    app.add_option("--criterion,-c", only, "run only these criteria (1-10)")->check(CLI::Range(1, 10));
    CLI11_PARSE(app, argc, argv);
    spdlog::set_level(spdlog::level::warn);

    const std::vector<Criterion> criteria = {
        {1, "wrapper round-trips", wrapper_round_trips},
        {2, "graph algebra oracles", graph_oracles},
        {3, "scheduler soundness", scheduler_soundness},
        {4, "conservation under placement", placement_conservation},
        {5, "pause queues without loss", pause_queues},
        {6, "live rebalance benchmark", [] { return run_bench(true, "testbed-default.json", kRebalanceBudgetS); }},
        {7, "firewall traversal", firewall_traversal},
        {8, "master statelessness", master_statelessness},
        {9, "stats throughput", [] { return run_bench(false, "testbed-default.json", kStatsBudgetS); }},
        {10, "worker liveness", liveness},
    };

    int failed = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.number) == only.end()) {
            continue;
        }
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS" : "FAIL") << " " << c.number << " " << c.name << ": " << o.detail << std::endl;
    }
    fs::remove_all(scratch_root());
    return failed == 0 ? 0 : 1;
}
