// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#include "support/oracles.hpp"

#include <echo/common/error.hpp>
#include <echo/flowmodel/dataflow.hpp>
#include <echo/flowmodel/partition.hpp>

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace echo;
using namespace echo::flow;
using echo::testing::oracle_cut;
using echo::testing::oracle_diff;

namespace {

const char* kEtl = R"({
  "name": "etl",
  "processors": [
    {"id":"source","kind":"builtin:source_replay","input_model":"stream","output_model":"microbatch",
     "config":{"file":"x"},"demands":{"cpu_millis":200,"mem_mb":64},"constraints":["edge"]},
    {"id":"parse","kind":"builtin:parse_senml","input_model":"microbatch","output_model":"stream"},
    {"id":"cep","kind":"cep","input_model":"stream","output_model":"stream","config":{"stages":[]}},
    {"id":"annotate","kind":"builtin:annotate","input_model":"microbatch","output_model":"microbatch"},
    {"id":"sink","kind":"builtin:sink_file","input_model":"microbatch","output_model":"microbatch"}
  ],
  "edges": [{"from":"source","to":"parse"},{"from":"parse","to":"cep"},
            {"from":"cep","to":"annotate"},{"from":"annotate","to":"sink"}],
  "qos": {"prefer_class":"cloud"}
})";

DataflowSpec chain(std::initializer_list<const char*> ids) {
    DataflowSpec s;
    s.name = "t";
    const char* prev = nullptr;
    for (const char* id : ids) {
        ProcessorSpec p;
        p.id = id;
        p.kind = "builtin:identity";
        s.processors.push_back(p);
        if (prev) {
            s.edges.push_back({prev, id});
        }
        prev = id;
    }
    return s;
}

PlacementMapping mapping(std::map<std::string, std::string> m) {
    return PlacementMapping{std::move(m)};
}

std::vector<std::string> violations_of(const std::string& text) {
    try {
        parse_and_validate(text);
    } catch (const ValidationError& e) {
        return e.violations();
    }
    return {};
}

}// namespace

TEST(Dataflow, ParsesEtlShape) {
    const auto spec = parse_and_validate(kEtl);
    EXPECT_EQ(spec.processors.size(), 5u);
    EXPECT_EQ(spec.edges.size(), 4u);
    EXPECT_EQ(spec.find("source")->constraints, std::vector<std::string>{"edge"});
    EXPECT_EQ(spec.find("parse")->output_model, DataModel::stream);
    EXPECT_EQ(spec.qos.at("prefer_class"), "cloud");
}

TEST(Dataflow, ReportsUnknownProcessor) {
    auto doc = nlohmann::json::parse(kEtl);
    doc["edges"].push_back({{"from", "sink"}, {"to", "ghost"}});
    const auto v = violations_of(doc.dump());
    ASSERT_FALSE(v.empty());
    EXPECT_NE(v.front().find("unknown processor ghost"), std::string::npos);
}

TEST(Dataflow, ReportsDuplicateId) {
    auto doc = nlohmann::json::parse(kEtl);
    doc["processors"][1]["id"] = "source";
    doc["edges"] = nlohmann::json::array();
    bool found = false;
    for (const auto& v : violations_of(doc.dump())) {
        found |= v.find("duplicate id source") != std::string::npos;
    }
    EXPECT_TRUE(found);
}

TEST(Dataflow, ReportsMissingModelAndNegativeDemand) {
    auto doc = nlohmann::json::parse(kEtl);
    doc["processors"][2].erase("input_model");
    doc["processors"][3]["demands"]["cpu_millis"] = -1;
    const auto v = violations_of(doc.dump());
    EXPECT_GE(v.size(), 2u);
}

TEST(Dataflow, RejectsSyntaxErrorsAndPureCycles) {
    EXPECT_THROW(parse_and_validate("{\"name\":"), ParseError);
    auto spec = chain({"a", "b"});
    spec.edges.push_back({"b", "a"});
    EXPECT_FALSE(validate(spec).ok());
    spec.edges.push_back({"b", "b"});
    spec.processors.push_back(spec.processors.front());
    spec.processors.back().id = "src";
    spec.edges.push_back({"src", "a"});
    EXPECT_TRUE(validate(spec).ok());
}

TEST(Dataflow, JsonRoundTrip) {
    const auto spec = parse_and_validate(kEtl);
    EXPECT_EQ(parse_and_validate(to_json(spec).dump()), spec);
}

TEST(Dataflow, ShippedExamplesValidate) {
    for (const char* name : {"etl", "stats", "yolo", "firewall"}) {
        std::ifstream in(std::string(ECHO_SOURCE_DIR) + "/dataflows/" + name + ".json");
        ASSERT_TRUE(in) << name;
        std::stringstream text;
        text << in.rdbuf();
        EXPECT_NO_THROW(parse_and_validate(text.str())) << name;
    }
}

TEST(Dataflow, TopologicalOrderBreaksCyclesByLowestId) {
    auto spec = chain({"s", "b", "a"});
    spec.edges.push_back({"a", "b"});
    const auto order = topological_order(spec);
    ASSERT_EQ(order.size(), 3u);
    EXPECT_EQ(order[0], "s");
}

TEST(EdgeCut, SingleCutIsPush) {
    const auto spec = chain({"A", "B", "C"});
    const auto plan = edge_cut(spec, mapping({{"A", "r1"}, {"B", "r1"}, {"C", "r2"}}), Reachability{}, "df");
    ASSERT_EQ(plan.cut_edges.size(), 1u);
    const auto& cut = plan.cut_edges[0];
    EXPECT_EQ(cut.from, "B");
    EXPECT_EQ(cut.to, "C");
    EXPECT_EQ(cut.direction, LinkDirection::push);
    EXPECT_EQ(cut.link_id, "df-B-C");
    EXPECT_EQ(plan.fragments.at("r1").processors, (std::set<std::string>{"A", "B"}));
    EXPECT_EQ(plan.fragments.at("r2").processors, (std::set<std::string>{"C"}));
}

TEST(EdgeCut, NoCutOnOneResource) {
    const auto plan = edge_cut(chain({"A", "B", "C"}), mapping({{"A", "r1"}, {"B", "r1"}, {"C", "r1"}}), Reachability{}, "df");
    EXPECT_TRUE(plan.cut_edges.empty());
    EXPECT_EQ(plan.fragments.size(), 1u);
}

TEST(EdgeCut, FirewalledDownstreamGetsPull) {
    Reachability reach;
    reach.accept_from("r2", {"r3"});
    const auto plan = edge_cut(chain({"A", "B", "C"}), mapping({{"A", "r1"}, {"B", "r1"}, {"C", "r2"}}), reach, "df");
    ASSERT_EQ(plan.cut_edges.size(), 1u);
    EXPECT_EQ(plan.cut_edges[0].direction, LinkDirection::pull);
}

TEST(EdgeCut, NeitherDirectionIsUnschedulable) {
    Reachability reach;
    reach.accept_from("r1", {});
    reach.accept_from("r2", {});
    try {
        edge_cut(chain({"A", "B"}), mapping({{"A", "r1"}, {"B", "r2"}}), reach, "df");
        FAIL() << "expected an unschedulable link";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("A"), std::string::npos);
    }
}

TEST(EdgeCut, SameDeviceAlwaysReachable) {
    Reachability reach;
    reach.accept_from("w1", {});
    reach.accept_from("w2", {});
    reach.set_device("w1", "d");
    reach.set_device("w2", "d");
    EXPECT_TRUE(reach.can_connect("w1", "w2"));
}

TEST(EdgeCut, CycleAcrossResourcesWarns) {
    auto spec = chain({"s", "a", "b"});
    spec.edges.push_back({"b", "a"});
    const auto plan = edge_cut(spec, mapping({{"s", "r1"}, {"a", "r1"}, {"b", "r2"}}), Reachability{}, "df");
    EXPECT_FALSE(plan.warnings.empty());
}

TEST(EdgeCut, RepeatedEdgesGetDistinctLinks) {
    auto spec = chain({"a", "b"});
    spec.edges.push_back({"a", "b"});
    const auto plan = edge_cut(spec, mapping({{"a", "r1"}, {"b", "r2"}}), Reachability{}, "df");
    ASSERT_EQ(plan.cut_edges.size(), 2u);
    EXPECT_NE(plan.cut_edges[0].link_id, plan.cut_edges[1].link_id);
}

TEST(EdgeCut, MatchesOracleAndReconstructsGraph) {
    std::mt19937 rng(17);
    for (int round = 0; round < 200; ++round) {
        const auto n = std::uniform_int_distribution<std::size_t>(1, 30)(rng);
        const auto spec = echo::testing::random_graph(rng, n, 3 * n);
        const auto m = echo::testing::random_mapping(rng, spec, 1 + rng() % 5);
        const auto plan = edge_cut(spec, m, Reachability{}, "df");

        std::multiset<echo::testing::EdgeTuple> cut;
        for (const auto& c : plan.cut_edges) {
            cut.insert({c.from, c.to});
        }
        EXPECT_EQ(cut, oracle_cut(spec, m));

        std::multiset<std::string> nodes;
        std::multiset<echo::testing::EdgeTuple> edges;
        for (const auto& [res, frag] : plan.fragments) {
            nodes.insert(frag.processors.begin(), frag.processors.end());
            for (const auto& e : frag.internal_edges) {
                edges.insert({e.from, e.to});
            }
            for (const auto& c : frag.cut_edges) {
                EXPECT_TRUE(c.from_resource == res || c.to_resource == res);
            }
        }
        edges.insert(cut.begin(), cut.end());
        std::multiset<std::string> want_nodes;
        std::multiset<echo::testing::EdgeTuple> want_edges;
        for (const auto& p : spec.processors) {
            want_nodes.insert(p.id);
        }
        for (const auto& e : spec.edges) {
            want_edges.insert({e.from, e.to});
        }
        EXPECT_EQ(nodes, want_nodes);
        EXPECT_EQ(edges, want_edges);
    }
}

TEST(GraphDiff, MigratingOneProcessor) {
    const auto spec = chain({"A", "B", "C"});
    const auto d = graph_diff(spec, mapping({{"A", "r1"}, {"B", "r1"}, {"C", "r1"}}), mapping({{"A", "r1"}, {"B", "r2"}, {"C", "r1"}}));
    EXPECT_EQ(d.moved, (std::set<std::string>{"B"}));
    EXPECT_EQ(d.affected, (std::set<std::string>{"A", "B", "C"}));
}

TEST(GraphDiff, IdentityIsEmpty) {
    const auto spec = chain({"A", "B", "C"});
    const auto m = mapping({{"A", "r1"}, {"B", "r2"}, {"C", "r1"}});
    EXPECT_EQ(graph_diff(spec, m, m), MigrationSet{});
}

TEST(GraphDiff, DifferentProcessorSetsThrow) {
    const auto spec = chain({"A", "B"});
    EXPECT_THROW(graph_diff(spec, mapping({{"A", "r1"}, {"B", "r1"}}), mapping({{"A", "r1"}})), ValidationError);
}

TEST(GraphDiff, MatchesOracleAndIsSymmetric) {
    std::mt19937 rng(23);
    for (int round = 0; round < 300; ++round) {
        const auto n = std::uniform_int_distribution<std::size_t>(1, 8)(rng);
        const auto spec = echo::testing::random_graph(rng, n, 2 * n);
        const auto a = echo::testing::random_mapping(rng, spec, 3);
        const auto b = echo::testing::random_mapping(rng, spec, 3);
        const auto d = graph_diff(spec, a, b);
        EXPECT_EQ(d, oracle_diff(spec, a, b));
        EXPECT_EQ(d.moved, graph_diff(spec, b, a).moved);
        EXPECT_TRUE(graph_diff(spec, a, a).moved.empty());
    }
}

TEST(Descriptors, RoundTripAndLinkSides) {
    const auto spec = chain({"A", "B", "C"});
    const auto plan = edge_cut(spec, mapping({{"A", "r1"}, {"B", "r1"}, {"C", "r2"}}), Reachability{}, "df");
    const auto descs = build_descriptors(spec, plan, "df", {{"r1", "http://h:1"}, {"r2", "http://h:2"}});
    ASSERT_EQ(descs.size(), 2u);
    const auto& up = descs.at("r1");
    ASSERT_EQ(up.links.size(), 1u);
    EXPECT_TRUE(up.links[0].outbound);
    EXPECT_EQ(up.links[0].peer_url, "http://h:2");
    EXPECT_FALSE(descs.at("r2").links[0].outbound);
    EXPECT_EQ(descriptor_from_json(to_json(up)), up);
}
