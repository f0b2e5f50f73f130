// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#include <echo/common/error.hpp>
#include <echo/engine/edge_queue.hpp>
#include <echo/engine/engine.hpp>
#include <echo/engine/engine_server.hpp>
#include <echo/engine/links.hpp>
#include <echo/engine/wire.hpp>
#include <echo/wrappers/builtins.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <thread>

using namespace echo;
using namespace echo::engine;
using data::DataBatch;
using Json = nlohmann::json;

namespace {

using namespace std::chrono_literals;

std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("echo-eng-" + std::to_string(::getpid()) + "-" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::filesystem::path senml_file(const std::filesystem::path& dir, int n) {
    const auto path = dir / "in.jsonl";
    std::ofstream out(path);
    for (int i = 0; i < n; ++i) {
        out << R"({"bn":"s)" << i % 7 << R"(:","e":[{"n":"t","u":"Cel","v":)" << i << R"(,"t":)" << i << "}]}\n";
    }
    return path;
}

flow::ProcessorSpec proc(std::string id, std::string kind, Json config = Json::object(),
                         flow::DataModel in = flow::DataModel::microbatch, flow::DataModel out = flow::DataModel::microbatch) {
    flow::ProcessorSpec p;
    p.id = std::move(id);
    p.kind = std::move(kind);
    p.config = std::move(config);
    p.input_model = in;
    p.output_model = out;
    return p;
}

/// source -> mid -> sink as a one-fragment descriptor.
flow::FragmentDescriptor linear(const std::string& df, const std::filesystem::path& input, double rate, int window) {
    flow::DataflowSpec spec;
    spec.name = df;
    spec.processors = {proc("source", "builtin:source_replay",
                            {{"file", input.string()}, {"rate", rate}, {"window", {{"mode", "count"}, {"n", window}}}},
                            flow::DataModel::stream, flow::DataModel::microbatch),
                       proc("mid", "builtin:identity"), proc("sink", "builtin:sink_count")};
    spec.edges = {{"source", "mid"}, {"mid", "sink"}};
    flow::PlacementMapping m;
    for (const auto& p : spec.processors) {
        m.assignments[p.id] = "w";
    }
    const auto plan = flow::edge_cut(spec, m, flow::Reachability{}, df);
    return flow::build_descriptors(spec, plan, df, {{"w", ""}}).at("w");
}

std::uint64_t sink_tuples(const Engine& e, const std::string& df, const std::string& sink = "sink") {
    return e.fragment_metrics(df)["processors"][sink]["logic"].value("tuples", std::uint64_t{0});
}

template<typename Pred>
bool eventually(Pred pred, std::chrono::milliseconds timeout = 20s) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (std::chrono::steady_clock::now() < deadline) {
        if (pred()) {
            return true;
        }
        std::this_thread::sleep_for(20ms);
    }
    return pred();
}

struct Registry {
    Registry() { wrappers::register_all(reg); }
    ProcessorRegistry reg;
};

const ProcessorRegistry& registry() {
    static Registry r;
    return r.reg;
}

EngineOptions options(const std::filesystem::path& dir, std::string worker = "w", std::set<std::string> reach = {"*"}) {
    EngineOptions o;
    o.worker_id = worker;
    o.device = worker;
    o.workdir = dir / worker;
    o.reachable_from = std::move(reach);
    return o;
}

}// namespace

TEST(EdgeQueue, FifoAndCapacity) {
    EdgeQueue q(3);
    std::vector<std::string> ids;
    for (int i = 0; i < 3; ++i) {
        auto b = DataBatch::make("", 0);
        ids.push_back(b.id());
        EXPECT_TRUE(q.try_push_for(b, 10ms));
    }
    EXPECT_FALSE(q.try_push_for(DataBatch::make("", 0), 20ms));
    EXPECT_EQ(q.depth(), 3u);
    q.inject({DataBatch::make("", 0)});
    EXPECT_EQ(q.depth(), 4u);
    for (int i = 0; i < 3; ++i) {
        EXPECT_EQ(q.try_pop()->id(), ids[i]);
    }
    q.take_all();
    EXPECT_FALSE(q.try_pop());
}

TEST(EdgeQueue, BlockingPushWakesOnPop) {
    EdgeQueue q(1);
    q.push(DataBatch::make("", 0));
    std::thread consumer([&] {
        std::this_thread::sleep_for(50ms);
        q.try_pop();
    });
    EXPECT_TRUE(q.push(DataBatch::make("", 0)));
    consumer.join();
    q.close();
    EXPECT_FALSE(q.push(DataBatch::make("", 0)));
}

TEST(EdgeQueue, PeekAndRemoveIds) {
    EdgeQueue q;
    std::vector<DataBatch> in;
    for (int i = 0; i < 4; ++i) {
        in.push_back(DataBatch::make("", 0));
        q.push(in.back());
    }
    EXPECT_EQ(q.peek(10).size(), 4u);
    EXPECT_EQ(q.depth(), 4u);
    EXPECT_EQ(q.remove_ids({in[1].id(), in[3].id(), "unknown"}), 2u);
    EXPECT_EQ(q.depth(), 2u);
    EXPECT_TRUE(q.peek(1, 30ms).size() == 1);
}

TEST(DedupWindow, EvictsOldest) {
    DedupWindow w(3);
    EXPECT_TRUE(w.insert("a"));
    EXPECT_FALSE(w.insert("a"));
    w.insert("b");
    w.insert("c");
    w.insert("d");
    EXPECT_FALSE(w.contains("a"));
    EXPECT_TRUE(w.contains("d"));
    EXPECT_EQ(w.size(), 3u);
}

TEST(Backoff, ExponentialWithCap) {
    Backoff b;
    EXPECT_EQ(b.delay(1), 200ms);
    EXPECT_EQ(b.delay(2), 400ms);
    EXPECT_EQ(b.delay(3), 800ms);
    EXPECT_EQ(b.delay(20), 5000ms);
}

TEST(Envelope, RoundTrip) {
    const auto b = DataBatch::make(std::string("bin\0ary\xff", 8), 0, {{"k", "v"}});
    const auto env = to_envelope(b);
    EXPECT_EQ(env["batch_id"], b.id());
    EXPECT_TRUE(env.contains("content_b64"));
    EXPECT_EQ(from_envelope(env), b);
    EXPECT_THROW(from_envelope(Json{{"batch_id", "x"}}), ParseError);
}

TEST(Engine, LocalPipelineConserves) {
    const auto dir = scratch("local");
    Engine e(options(dir), registry());
    e.deploy(linear("df", senml_file(dir, 1000), 0, 50));
    e.start("df");
    EXPECT_TRUE(eventually([&] { return sink_tuples(e, "df") == 1000; }));
    const auto m = e.fragment_metrics("df");
    EXPECT_EQ(m["processors"]["source"]["out_tuples"], 1000);
    EXPECT_EQ(m["processors"]["mid"]["in_tuples"], 1000);
    e.undeploy("df");
    EXPECT_FALSE(e.has_fragment("df"));
}

TEST(Engine, IdleFragmentReportsZero) {
    const auto dir = scratch("idle");
    Engine e(options(dir), registry());
    e.deploy(linear("df", senml_file(dir, 10), 0, 50));
    const auto m = e.fragment_metrics("df");
    EXPECT_EQ(sink_tuples(e, "df"), 0u);
    for (const auto& [key, q] : m["queues"].items()) {
        EXPECT_EQ(q["depth"], 0) << key;
    }
}

TEST(Engine, PausedProcessorQueuesAndLosesNothing) {
    const auto dir = scratch("pause");
    Engine e(options(dir), registry());
    e.deploy(linear("df", senml_file(dir, 300), 200, 1));
    e.start("df");
    ASSERT_TRUE(eventually([&] { return sink_tuples(e, "df") > 0; }));
    EXPECT_TRUE(e.pause("df", "mid"));
    EXPECT_TRUE(e.pause("df", "mid"));
    const auto frozen = sink_tuples(e, "df");
    std::this_thread::sleep_for(500ms);
    EXPECT_EQ(sink_tuples(e, "df"), frozen);
    const auto depth = e.queues("df")["in"]["source->mid"]["depth"].get<std::size_t>();
    EXPECT_GT(depth, 50u);
    e.resume("df", "mid");
    EXPECT_TRUE(eventually([&] { return sink_tuples(e, "df") == 300; }));
}

TEST(Engine, RejectsUnknownKindAndDuplicates) {
    const auto dir = scratch("reject");
    Engine e(options(dir), registry());
    auto desc = linear("df", senml_file(dir, 10), 0, 5);
    e.deploy(desc);
    EXPECT_THROW(e.deploy(desc), Conflict);
    auto bad = linear("df2", senml_file(dir, 10), 0, 5);
    bad.processors[1].kind = "builtin:nosuch";
    try {
        e.deploy(bad);
        FAIL();
    } catch (const ValidationError& err) {
        EXPECT_NE(std::string(err.what()).find("mid"), std::string::npos);
    }
    EXPECT_FALSE(e.has_fragment("df2"));
    EXPECT_THROW(e.pause("nope", "mid"), NotFound);
}

TEST(Engine, HostsSeveralDataflows) {
    const auto dir = scratch("multi");
    Engine e(options(dir), registry());
    e.deploy(linear("a", senml_file(dir, 100), 0, 10));
    e.deploy(linear("b", senml_file(dir, 100), 0, 10));
    e.start("a");
    e.start("b");
    EXPECT_TRUE(eventually([&] { return sink_tuples(e, "a") == 100 && sink_tuples(e, "b") == 100; }));
    EXPECT_EQ(e.list().size(), 2u);
}

TEST(Engine, TakeAndInjectMoveQueuedBatches) {
    const auto dir = scratch("take");
    Engine e(options(dir), registry());
    flow::FragmentDescriptor desc;
    desc.dataflow = "df";
    desc.resource = "w";
    desc.processors = {proc("mid", "builtin:identity"), proc("sink", "builtin:sink_count")};
    desc.edges = {{"mid->sink", "mid", "sink"}};
    desc.links = {{.id = "df-source-mid", .edge_key = "source->mid", .direction = flow::LinkDirection::push, .outbound = false,
                   .local_processor = "mid", .remote_processor = "source", .peer_url = "http://127.0.0.1:1"}};
    desc.paused = {"mid"};
    e.deploy(desc);
    e.start("df");
    std::vector<DataBatch> batches;
    for (int i = 0; i < 3; ++i) {
        batches.push_back(data::stream_to_batch({{"x", 1.0, "", 0}, {"x", 2.0, "", 0}}, data::WindowPolicy::count(2)).front());
    }
    e.inject("df", "source->mid", batches);
    EXPECT_EQ(e.queues("df")["in"]["source->mid"]["depth"], 3);
    const auto taken = e.take("df", "source->mid");
    EXPECT_EQ(taken, batches);
    EXPECT_EQ(e.queues("df")["in"]["source->mid"]["depth"], 0);
    e.inject("df", "source->mid", taken);
    e.resume("df", "mid");
    EXPECT_TRUE(eventually([&] { return sink_tuples(e, "df") == 6; })) << e.fragment_metrics("df").dump();
    EXPECT_THROW(e.take("df", "nope->mid"), NotFound);
}

class LinkPair : public ::testing::TestWithParam<flow::LinkDirection> {
  protected:
    void SetUp() override {
        dir_ = scratch(std::string("links-") + std::string(flow::to_string(GetParam())));
        up_ = std::make_unique<Engine>(options(dir_, "up"), registry());
        down_ = std::make_unique<Engine>(options(dir_, "down"), registry());
        up_server_ = std::make_unique<EngineServer>(*up_);
        down_server_ = std::make_unique<EngineServer>(*down_);
        up_server_->start("127.0.0.1:0");
        down_server_->start("127.0.0.1:0");
    }
    void TearDown() override {
        up_server_->stop();
        down_server_->stop();
        up_->shutdown();
        down_->shutdown();
    }

    std::filesystem::path dir_;
    std::unique_ptr<Engine> up_, down_;
    std::unique_ptr<EngineServer> up_server_, down_server_;
};

TEST_P(LinkPair, CrossWorkerPipelineConserves) {
    flow::DataflowSpec spec;
    spec.name = "x";
    spec.processors = {proc("source", "builtin:source_replay", {{"file", senml_file(dir_, 2000).string()}, {"window", {{"mode", "count"}, {"n", 20}}}},
                            flow::DataModel::stream, flow::DataModel::microbatch),
                       proc("sink", "builtin:sink_count")};
    spec.edges = {{"source", "sink"}};
    flow::PlacementMapping m{{{"source", "up"}, {"sink", "down"}}};
    flow::Reachability reach;
    if (GetParam() == flow::LinkDirection::pull) {
        reach.accept_from("down", {});
    }
    const auto plan = flow::edge_cut(spec, m, reach, "x");
    ASSERT_EQ(plan.cut_edges.at(0).direction, GetParam());
    const auto descs = flow::build_descriptors(spec, plan, "x", {{"up", up_server_->url()}, {"down", down_server_->url()}});
    down_->deploy(descs.at("down"));
    up_->deploy(descs.at("up"));
    down_->start("x");
    up_->start("x");
    EXPECT_TRUE(eventually([&] { return sink_tuples(*down_, "x") == 2000; }, 30s));
    std::this_thread::sleep_for(200ms);
    EXPECT_EQ(sink_tuples(*down_, "x"), 2000u);
}

INSTANTIATE_TEST_SUITE_P(Directions, LinkPair, ::testing::Values(flow::LinkDirection::push, flow::LinkDirection::pull),
                         [](const auto& info) { return std::string(flow::to_string(info.param)); });

TEST(LinkWire, PushDeduplicatesAndPullServesWhatIsQueued) {
    const auto dir = scratch("wire");
    Engine e(options(dir), registry());
    EngineServer server(e);
    server.start("127.0.0.1:0");

    flow::FragmentDescriptor in;
    in.dataflow = "d";
    in.resource = "w";
    in.processors = {proc("sink", "builtin:sink_count")};
    in.links = {{.id = "d-src-sink", .edge_key = "src->sink", .direction = flow::LinkDirection::push, .outbound = false,
                 .local_processor = "sink", .remote_processor = "src", .peer_url = "http://127.0.0.1:1"}};
    e.deploy(in);
    e.start("d");
    net::HttpClient http(server.url());
    http.set_header(kDeviceHeader, "elsewhere");
    const auto batch = data::stream_to_batch({{"x", 1.0, "", 0}}, data::WindowPolicy::count(1)).front();
    for (int i = 0; i < 100; ++i) {
        const auto b = data::stream_to_batch({{"x", double(i), "", 0}}, data::WindowPolicy::count(1)).front();
        ASSERT_TRUE(http.post_json("/links/d-src-sink/batches", to_envelope(b)).ok());
    }
    const auto first = http.post_json("/links/d-src-sink/batches", to_envelope(batch)).json();
    const auto again = http.post_json("/links/d-src-sink/batches", to_envelope(batch)).json();
    EXPECT_TRUE(first.value("accepted", false));
    EXPECT_FALSE(first.value("duplicate", false));
    EXPECT_TRUE(again.value("duplicate", false));
    EXPECT_TRUE(eventually([&] { return sink_tuples(e, "d") == 101; }));

    flow::FragmentDescriptor out;
    out.dataflow = "p";
    out.resource = "w";
    out.processors = {proc("src", "builtin:source_replay", {{"file", senml_file(dir, 4).string()}, {"window", {{"mode", "count"}, {"n", 1}}}},
                           flow::DataModel::stream, flow::DataModel::microbatch)};
    out.links = {{.id = "p-src-sink", .edge_key = "src->sink", .direction = flow::LinkDirection::pull, .outbound = true,
                  .local_processor = "src", .remote_processor = "sink", .peer_url = "http://127.0.0.1:1"}};
    e.deploy(out);
    e.start("p");
    // Four data batches plus the end-of-stream marker.
    ASSERT_TRUE(eventually([&] { return e.fragment_metrics("p")["queues"]["src->sink@out"]["depth"] == 5; }));
    const auto served = http.get("/links/p-src-sink/batches?max=10&wait_ms=100").json()["batches"];
    ASSERT_EQ(served.size(), 5u);
    std::uint64_t tuples = 0;
    for (const auto& b : from_envelopes(served)) {
        tuples += b.count();
    }
    EXPECT_EQ(tuples, 4u);
    EXPECT_TRUE(from_envelopes(served).back().is_eos());
    EXPECT_EQ(http.get("/links/p-src-sink/batches?max=2&wait_ms=0").json()["batches"].size(), 2u);
    Json ids = Json::array();
    for (const auto& env : served) {
        ids.push_back(env["batch_id"]);
    }
    EXPECT_TRUE(http.post_json("/links/p-src-sink/ack", {{"batch_ids", ids}}).ok());
    EXPECT_EQ(http.get("/links/p-src-sink/batches?max=10&wait_ms=0").json()["batches"].size(), 0u);
    server.stop();
}

TEST(LinkWire, FirewallShimRejectsUnlistedDevices) {
    const auto dir = scratch("gate");
    Engine e(options(dir, "edge1", {"edge2"}), registry());
    EngineServer server(e);
    server.start("127.0.0.1:0");
    net::HttpClient cloud(server.url());
    cloud.set_header(kDeviceHeader, "cloud1");
    EXPECT_EQ(cloud.post_json("/links/any/batches", to_envelope(DataBatch::make("", 0))).status, 403);
    net::HttpClient anonymous(server.url());
    EXPECT_EQ(anonymous.get("/links/any/batches?max=1").status, 403);
    EXPECT_EQ(anonymous.get("/health").status, 200);
    EXPECT_TRUE(e.admits("edge2"));
    EXPECT_TRUE(e.admits("edge1"));
    server.stop();
}

TEST(Metrics, BufferedWhileCatalogIsDown) {
    const auto dir = scratch("metrics");
    auto o = options(dir);
    o.catalog_url = "http://127.0.0.1:1";
    Engine e(o, registry());
    for (int i = 0; i < 105; ++i) {
        e.report_metrics();
    }
    EXPECT_EQ(e.buffered_samples(), 100u);
}
