// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#include <echo/catalog/catalog_client.hpp>
#include <echo/cli/bench.hpp>
#include <echo/common/error.hpp>
#include <echo/common/subprocess.hpp>
#include <echo/net/http.hpp>

#include <spdlog/spdlog.h>

#include <fstream>
#include <numeric>
#include <random>
#include <thread>

namespace echo::cli {

using Json = nlohmann::json;
using Clock = std::chrono::steady_clock;

void write_senml(const std::filesystem::path& path, std::size_t n, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> temp(22.0, 4.0);
    std::ofstream out(path);
    for (std::size_t i = 0; i < n; ++i) {
        Json rec{{"bn", "urn:dev:sensor" + std::to_string(i % 16) + ":"},
                 {"bt", 1500000000000 + static_cast<std::int64_t>(i) * 10},
                 {"e", Json::array({{{"n", "temperature"}, {"u", "Cel"}, {"v", std::round(temp(rng) * 100) / 100}, {"t", 0}}})}};
        out << rec.dump() << '\n';
    }
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
}

namespace {

/// Counts lines appended to a file.
class LineCounter {
  public:
    explicit LineCounter(std::filesystem::path path) : path_(std::move(path)) {}

    std::uint64_t poll() {
        std::ifstream in(path_, std::ios::binary);
        if (!in) {
            return lines_;
        }
        in.seekg(static_cast<std::streamoff>(offset_));
        char buf[65536];
        while (in.read(buf, sizeof buf) || in.gcount() > 0) {
            const auto got = in.gcount();
            lines_ += static_cast<std::uint64_t>(std::count(buf, buf + got, '\n'));
            offset_ += static_cast<std::uint64_t>(got);
        }
        return lines_;
    }

  private:
    std::filesystem::path path_;
    std::uint64_t offset_ = 0;
    std::uint64_t lines_ = 0;
};

Json proc(const std::string& id, const std::string& kind, const std::string& in, const std::string& out, Json config, int cpu,
          std::vector<std::string> constraints = {}) {
    return Json{{"id", id},
                {"kind", kind},
                {"input_model", in},
                {"output_model", out},
                {"config", std::move(config)},
                {"demands", {{"cpu_millis", cpu}, {"mem_mb", 64}}},
                {"constraints", constraints}};
}

net::HttpClient master_client(const Testbed& tb) {
    return net::HttpClient(tb.master_url(), {std::chrono::milliseconds(2000), std::chrono::milliseconds(120000)});
}

Json checked(const net::HttpResult& r, const std::string& what) {
    if (!r.ok()) {
        throw Error(what + " failed (" + std::to_string(r.status) + "): " + r.message());
    }
    return r.json();
}

double mean(const std::vector<double>& v, std::size_t from, std::size_t to) {
    to = std::min(to, v.size());
    if (from >= to) {
        return 0;
    }
    return std::accumulate(v.begin() + static_cast<std::ptrdiff_t>(from), v.begin() + static_cast<std::ptrdiff_t>(to), 0.0) /
           static_cast<double>(to - from);
}

/// Samples the sink into 1 s buckets and worker CPU from the catalog.
struct Recorder {
    LineCounter sink;
    catalog::CatalogClient catalog;
    Clock::time_point t0 = Clock::now();
    std::vector<double> buckets;
    std::vector<std::map<std::string, double>> cpu;
    std::uint64_t total = 0;
    /// Sample times (s) at which the sink had grown since the previous sample.
    std::vector<double> arrivals;

    Recorder(std::filesystem::path sink_path, const std::string& catalog_url) : sink(std::move(sink_path)), catalog(catalog_url) {}

    double elapsed() const { return std::chrono::duration<double>(Clock::now() - t0).count(); }

    void sample() {
        const auto now_total = sink.poll();
        const auto idx = static_cast<std::size_t>(elapsed());
        if (buckets.size() <= idx) {
            buckets.resize(idx + 1, 0.0);
            cpu.resize(idx + 1);
            try {
                for (const auto& item : catalog.query("/worker/")) {
                    if (item.href.ends_with("/metrics")) {
                        const auto wid = item.href.substr(8, item.href.size() - 8 - 8);
                        cpu[idx][wid] = std::stod(item.value_or("urn:echo:rel:CPUUtil", "0"));
                    }
                }
            } catch (const std::exception&) {
            }
        }
        buckets[idx] += static_cast<double>(now_total - total);
        if (now_total > total) {
            arrivals.push_back(elapsed());
        }
        total = now_total;
    }

    void run_until(double t_s) {
        while (elapsed() < t_s) {
            sample();
            std::this_thread::sleep_for(std::chrono::milliseconds(100));
        }
    }

    void write_csv(const std::filesystem::path& path) const {
        std::set<std::string> workers;
        for (const auto& m : cpu) {
            for (const auto& [w, v] : m) {
                workers.insert(w);
            }
        }
        std::ofstream out(path);
        out << "t_s,sink_tuples_per_s";
        for (const auto& w : workers) {
            out << ",cpu_" << w;
        }
        out << '\n';
        for (std::size_t i = 0; i < buckets.size(); ++i) {
            out << i << ',' << buckets[i];
            for (const auto& w : workers) {
                const auto it = cpu[i].find(w);
                out << ',';
                if (it != cpu[i].end()) {
                    out << it->second;
                }
            }
            out << '\n';
        }
    }
};

/// Waits until a processor reports finished and returns its metrics summary.
Json wait_processor(net::HttpClient& master, const std::string& uuid, const std::string& pid, double timeout_s) {
    const auto deadline = Clock::now() + std::chrono::duration<double>(timeout_s);
    Json last;
    while (Clock::now() < deadline) {
        const auto doc = master.get("/dataflows/" + uuid);
        if (doc.ok()) {
            last = doc.json()["metrics"].value(pid, Json::object());
            if (last.value("state", "") == "stopped" || last.value("finished", false)) {
                return last;
            }
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(500));
    }
    return last;
}

void finish(const std::filesystem::path& outdir, Json& report, const Recorder& rec) {
    std::vector<double> series(rec.buckets.begin(), rec.buckets.end());
    report["sink_rate_series"] = series;
    report["cpu_series"] = rec.cpu;
    std::ofstream(outdir / "report.json") << report.dump(2) << '\n';
    rec.write_csv(outdir / "rates.csv");
}

}// namespace

std::vector<std::string> failed_verdicts(const Json& report) {
    std::vector<std::string> failed;
    const auto verdicts = report.value("verdicts", Json::object());
    for (const auto& [name, v] : verdicts.items()) {
        if (v.is_boolean() && !v.get<bool>()) {
            failed.push_back(name);
        }
    }
    return failed;
}

Json bench_rebalance(const BenchOptions& options) {
    const double T = options.duration_s;
    const double rate = options.rate > 0 ? options.rate : 200.0;
    const double trigger_at = T / 2;
    std::filesystem::create_directories(options.outdir);
    const auto outdir = std::filesystem::absolute(options.outdir);
    const auto data = outdir / "senml.jsonl";
    const auto sink = outdir / "sink.jsonl";
    write_senml(data, 5000);
    std::filesystem::remove(sink);

    TestbedOptions tbo;
    tbo.echo_binary = options.echo_binary;
    tbo.defer_classes = {"cloud"};
    auto cfg = options.testbed;
    if (cfg.workdir.empty()) {
        cfg.workdir = outdir / "testbed";
    }
    Testbed tb(cfg, tbo);
    tb.up();

    Json spec{{"name", "etl"},
              {"qos", {{"prefer_class", "cloud"}}},
              {"processors",
               Json::array({proc("source", "builtin:source_replay", "stream", "microbatch",
                                 {{"file", data.string()},
                                  {"rate", rate},
                                  {"loop", true},
                                  {"mode", "raw"},
                                  {"max_ms", static_cast<std::int64_t>(T * 1000)},
                                  {"window", {{"mode", "count"}, {"n", 10}}}},
                                 300, {"edge"}),
                            proc("parse", "builtin:parse_senml", "microbatch", "stream", {{"window", {{"mode", "count"}, {"n", 10}}}}, 300),
                            proc("cep", "cep", "stream", "stream",
                                 {{"stages", Json::array({{{"op", "filter"}, {"field", "v"}, {"cmp", ">"}, {"value", -100}},
                                                          {{"op", "scale"}, {"field", "v"}, {"factor", 1.0}, {"offset", 0.0}, {"min", -50}, {"max", 80}}})},
                                  {"work_us", 2500},
                                  {"window", {{"mode", "count"}, {"n", 5}}}},
                                 500),
                            proc("annotate", "builtin:annotate", "microbatch", "microbatch", {{"key", "stage"}, {"val", "clean"}}, 200),
                            proc("sink", "builtin:sink_file", "microbatch", "microbatch", {{"path", sink.string()}}, 200)})},
              {"edges", Json::array({{{"from", "source"}, {"to", "parse"}},
                                     {{"from", "parse"}, {"to", "cep"}},
                                     {{"from", "cep"}, {"to", "annotate"}},
                                     {{"from", "annotate"}, {"to", "sink"}}})}};
    std::ofstream(outdir / "dataflow.json") << spec.dump(2) << '\n';

    auto master = master_client(tb);
    Recorder rec(sink, tb.catalog_url());
    const auto uuid = checked(master.post_json("/dataflows", spec), "submit").at("uuid").get<std::string>();
    const auto before_mapping = checked(master.get("/dataflows/" + uuid), "status")["mapping"];
    spdlog::info("bench rebalance: dataflow {} running, trigger at {} s", uuid, trigger_at);

    Json report{{"bench", "rebalance"}, {"uuid", uuid}, {"duration_s", T}, {"source_rate", rate}, {"mapping_before", before_mapping}};
    rec.run_until(trigger_at);
    double trigger_t = rec.elapsed();
    if (options.rebalance) {
        const auto added = tb.spawn_workers("cloud");
        report["workers_added"] = added;
        trigger_t = rec.elapsed();
        std::thread rebalance_call([&] {
            const auto r = master.post("/dataflows/" + uuid + "/rebalance", "{}");
            report["rebalance"] = r.ok() ? r.json() : Json{{"error", r.message()}, {"status", r.status}};
        });
        while (rebalance_call.joinable()) {
            rec.sample();
            std::this_thread::sleep_for(std::chrono::milliseconds(100));
            if (report.contains("rebalance")) {
                rebalance_call.join();
            }
        }
    }
    report["rebalance_at_s"] = trigger_t;
    rec.run_until(T + 1);

    // Drain: wait for the source to end and the sink to catch up.
    const auto source = wait_processor(master, uuid, "source", 30);
    const std::uint64_t emitted = source.value("logic", Json::object()).value("records_emitted", std::uint64_t{0});
    const auto deadline = Clock::now() + std::chrono::seconds(120);
    while (rec.total < emitted && Clock::now() < deadline) {
        rec.sample();
        std::this_thread::sleep_for(std::chrono::milliseconds(200));
    }
    rec.sample();
    report["mapping_after"] = checked(master.get("/dataflows/" + uuid), "status")["mapping"];
    master.del("/dataflows/" + uuid);

    const auto& b = rec.buckets;
    const auto trig = static_cast<std::size_t>(trigger_t);
    const std::size_t before_from = trig > 25 ? trig - 20 : std::min<std::size_t>(5, trig);
    const double rate_before = mean(b, before_from, trig);
    const auto after_from = static_cast<std::size_t>(trigger_t + 10);
    const auto after_to = static_cast<std::size_t>(T) - 1;
    const double rate_after = mean(b, after_from, after_to);
    double dip_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = trig; i < std::min(b.size(), trig + static_cast<std::size_t>(kDipWindowS)); ++i) {
        dip_min = std::min(dip_min, b[i]);
    }
    // Informational only: the longest stretch without sink output near the
    // trigger, at the 100 ms sampling resolution.
    double max_gap = 0;
    for (std::size_t i = 1; i < rec.arrivals.size(); ++i) {
        if (rec.arrivals[i] >= trigger_t && rec.arrivals[i - 1] <= trigger_t + kDipWindowS) {
            max_gap = std::max(max_gap, rec.arrivals[i] - std::max(rec.arrivals[i - 1], trigger_t));
        }
    }
    report["max_sink_gap_s"] = max_gap;
    const double ratio = rate_before > 0 ? rate_after / rate_before : 0.0;
    report["rate_before"] = rate_before;
    report["rate_after"] = rate_after;
    report["rate_ratio"] = ratio;
    report["dip_min_bucket"] = std::isfinite(dip_min) ? dip_min : 0.0;
    report["source_tuples"] = emitted;
    report["sink_tuples"] = rec.total;
    Json verdicts;
    verdicts["conservation"] = emitted > 0 && rec.total == emitted;
    if (options.rebalance) {
        verdicts["rate_increase"] = ratio >= kMinRateRatio;
        verdicts["transient_dip"] = std::isfinite(dip_min) && dip_min < kDipFraction * rate_before;
        verdicts["rebalance_succeeded"] = report["rebalance"].contains("mapping") && !report["rebalance"].value("noop", false);
    } else {
        const bool flat = rate_before > 0 && ratio > 0.7 && ratio < 1.3;
        verdicts["no-op baseline"] = flat;
    }
    report["verdicts"] = verdicts;
    finish(outdir, report, rec);
    tb.down();
    return report;
}

Json bench_stats(const BenchOptions& options) {
    const double T = options.duration_s;
    const double warmup = 5;
    const double rate = options.rate > 0 ? options.rate : 1000.0;
    std::filesystem::create_directories(options.outdir);
    const auto outdir = std::filesystem::absolute(options.outdir);
    const auto data = outdir / "senml.jsonl";
    const auto sink = outdir / "filter-sink.jsonl";
    write_senml(data, 20000);
    std::filesystem::remove(sink);

    TestbedOptions tbo;
    tbo.echo_binary = options.echo_binary.empty() ? default_echo_binary() : options.echo_binary;
    auto cfg = options.testbed;
    if (cfg.workdir.empty()) {
        cfg.workdir = outdir / "testbed";
    }
    Testbed tb(cfg, tbo);
    tb.up();

    Subprocess::Options so;
    so.argv = {tbo.echo_binary.string(), "stub-engine", "--listen", "127.0.0.1:0", "--mode", "echo"};
    so.capture_stdout = true;
    so.stderr_file = cfg.workdir / "stub-engine.log";
    auto stub = Subprocess::spawn(so);
    const auto stub_url = "http://127.0.0.1:" + std::to_string(await_listening(stub, std::chrono::milliseconds(10000)));

    const auto window = Json{{"mode", "count"}, {"n", 50}};
    Json spec{{"name", "stats"},
              {"qos", {{"prefer_class", "cloud"}}},
              {"processors",
               Json::array({proc("source", "builtin:source_replay", "stream", "microbatch",
                                 {{"file", data.string()},
                                  {"rate", rate},
                                  {"loop", true},
                                  {"mode", "raw"},
                                  {"max_ms", static_cast<std::int64_t>((T + warmup) * 1000)},
                                  {"window", window}},
                                 200, {"cloud"}),
                            proc("parse", "builtin:parse_senml", "microbatch", "stream", {{"window", window}}, 300),
                            proc("filter", "cep", "stream", "stream",
                                 {{"stages", Json::array({{{"op", "filter"}, {"field", "v"}, {"cmp", ">"}, {"value", -100}}})}, {"window", window}},
                                 300),
                            proc("aggregate", "cep", "stream", "stream",
                                 {{"stages", Json::array({{{"op", "window_agg"}, {"n", 10}, {"agg", "avg"}, {"field", "v"}}})}, {"window", window}},
                                 300),
                            proc("count", "cep", "stream", "stream",
                                 {{"stages", Json::array({{{"op", "pattern_count"},
                                                           {"predicate", {{"field", "v"}, {"cmp", ">"}, {"value", 25}}},
                                                           {"n", 50},
                                                           {"k", 10}}})},
                                  {"window", {{"mode", "count"}, {"n", 1}}}},
                                 300),
                            proc("bridge", "bridge", "microbatch", "microbatch",
                                 {{"endpoint", stub_url}, {"ingress", "stats-in"}, {"egress", "stats-out"}}, 300),
                            proc("filter_sink", "builtin:sink_file", "microbatch", "microbatch", {{"path", sink.string()}}, 100),
                            proc("aggregate_sink", "builtin:sink_count", "microbatch", "microbatch", Json::object(), 100),
                            proc("count_sink", "builtin:sink_count", "microbatch", "microbatch", Json::object(), 100)})},
              {"edges", Json::array({{{"from", "source"}, {"to", "parse"}},
                                     {{"from", "parse"}, {"to", "filter"}},
                                     {{"from", "parse"}, {"to", "aggregate"}},
                                     {{"from", "parse"}, {"to", "count"}},
                                     {{"from", "filter"}, {"to", "bridge"}},
                                     {{"from", "bridge"}, {"to", "filter_sink"}},
                                     {{"from", "aggregate"}, {"to", "aggregate_sink"}},
                                     {{"from", "count"}, {"to", "count_sink"}}})}};
    std::ofstream(outdir / "dataflow.json") << spec.dump(2) << '\n';

    auto master = master_client(tb);
    Recorder rec(sink, tb.catalog_url());
    const auto uuid = checked(master.post_json("/dataflows", spec), "submit").at("uuid").get<std::string>();
    spdlog::info("bench stats: dataflow {} running at {} ev/s", uuid, rate);
    Json report{{"bench", "stats"}, {"uuid", uuid}, {"duration_s", T}, {"warmup_s", warmup}, {"source_rate", rate}};
    rec.run_until(warmup + T / 2);
    report["task_rates"] = checked(master.get("/dataflows/" + uuid), "status")["metrics"];
    rec.run_until(warmup + T + 1);

    const auto source = wait_processor(master, uuid, "source", 30);
    const std::uint64_t emitted = source.value("logic", Json::object()).value("records_emitted", std::uint64_t{0});
    const auto deadline = Clock::now() + std::chrono::seconds(60);
    while (rec.total < emitted && Clock::now() < deadline) {
        rec.sample();
        std::this_thread::sleep_for(std::chrono::milliseconds(200));
    }
    rec.sample();
    const auto final_doc = checked(master.get("/dataflows/" + uuid), "status");
    report["final_metrics"] = final_doc["metrics"];
    report["mapping"] = final_doc["mapping"];
    master.del("/dataflows/" + uuid);

    const auto from = static_cast<std::size_t>(warmup);
    const auto to = static_cast<std::size_t>(warmup + T);
    const double sustained = mean(rec.buckets, from, to);
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = from; i < std::min(to, rec.buckets.size()); ++i) {
        worst = std::min(worst, rec.buckets[i]);
    }
    report["sustained_sink_rate"] = sustained;
    report["min_bucket"] = std::isfinite(worst) ? worst : 0.0;
    report["source_tuples"] = emitted;
    report["sink_tuples"] = rec.total;
    report["sustained_fraction"] = sustained / rate;
    Json verdicts;
    verdicts["sustained_rate"] = sustained >= kMinSustainedFraction * rate && rec.buckets.size() >= to;
    verdicts["conservation"] = emitted > 0 && rec.total == emitted;
    report["verdicts"] = verdicts;
    finish(outdir, report, rec);
    stub.terminate(std::chrono::milliseconds(2000));
    tb.down();
    return report;
}

}// namespace echo::cli
