// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#include <echo/catalog/catalog.hpp>
#include <echo/catalog/catalog_client.hpp>
#include <echo/catalog/catalog_json.hpp>
#include <echo/catalog/catalog_server.hpp>
#include <echo/common/error.hpp>
#include <echo/common/time.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <random>
#include <thread>

using namespace echo;
using namespace echo::catalog;

namespace {

CatalogItem item(std::string href, std::string rel = "urn:echo:rel:cores", std::string val = "4") {
    CatalogItem it;
    it.href = std::move(href);
    it.add(rel, std::move(val));
    return it;
}

}// namespace

TEST(Catalog, RegisterThenGet) {
    Catalog cat;
    EXPECT_EQ(cat.register_item(item("/device/e97e0195acf4")), Catalog::WriteResult::created);
    const auto got = cat.get_item("/device/e97e0195acf4");
    ASSERT_TRUE(got);
    EXPECT_EQ(got->value("urn:echo:rel:cores"), "4");
    ASSERT_TRUE(got->value(rel::kLastUpdated));
    EXPECT_TRUE(parse_iso8601(*got->value(rel::kLastUpdated)).has_value());
}

TEST(Catalog, ReRegisterReplacesWholeItem) {
    Catalog cat;
    cat.register_item(item("/device/a", "urn:echo:rel:cores", "4"));
    EXPECT_EQ(cat.register_item(item("/device/a", "urn:echo:rel:mem", "1024")), Catalog::WriteResult::replaced);
    const auto got = cat.get_item("/device/a");
    ASSERT_TRUE(got);
    EXPECT_FALSE(got->value("urn:echo:rel:cores"));
    EXPECT_EQ(got->value("urn:echo:rel:mem"), "1024");
    EXPECT_EQ(cat.size(), 1u);
}

TEST(Catalog, RejectsMalformedHrefs) {
    Catalog cat;
    for (const char* bad : {"bad href", "", "device/a", "/device//a", "/nosuchkind/a", "/device/a b"}) {
        EXPECT_THROW(cat.register_item(item(bad)), ValidationError) << bad;
    }
    CatalogItem empty_rel = item("/device/a");
    empty_rel.metadata.push_back({"", "x"});
    EXPECT_THROW(cat.register_item(empty_rel), ValidationError);
}

TEST(Catalog, GetUnknownIsNotFound) {
    Catalog cat;
    EXPECT_FALSE(cat.get_item("/device/unknown"));
}

TEST(Catalog, SubItemsAreIndependent) {
    Catalog cat;
    cat.register_item(item("/device/x"));
    cat.register_item(item("/device/x/CPUUtil", std::string(rel::kValue), "12.5"));
    EXPECT_EQ(cat.get_item("/device/x/CPUUtil")->value(rel::kValue), "12.5");
    EXPECT_TRUE(cat.delete_item("/device/x"));
    EXPECT_FALSE(cat.delete_item("/device/x"));
    EXPECT_TRUE(cat.get_item("/device/x/CPUUtil"));
}

TEST(Catalog, QueryPrefixExamples) {
    Catalog cat;
    cat.register_item(item("/device/b"));
    cat.register_item(item("/dataflow/x"));
    cat.register_item(item("/device/a"));
    const auto devices = cat.query_prefix("/device/");
    ASSERT_EQ(devices.size(), 2u);
    EXPECT_EQ(devices[0].href, "/device/a");
    EXPECT_EQ(devices[1].href, "/device/b");
    EXPECT_EQ(cat.query_prefix("").size(), 3u);
    EXPECT_TRUE(cat.query_prefix("/worker/").empty());
}

TEST(Catalog, QueryPrefixMatchesReferenceFilter) {
    std::mt19937 rng(11);
    const std::vector<std::string> kinds{"device", "worker", "dataflow", "service"};
    std::uniform_int_distribution<int> kind(0, 3);
    std::uniform_int_distribution<int> id(0, 60);
    std::uniform_int_distribution<int> sub(0, 3);
    for (int round = 0; round < 20; ++round) {
        Catalog cat;
        std::set<std::string> hrefs;
        const int n = std::uniform_int_distribution<int>(0, 1000)(rng);
        for (int i = 0; i < n; ++i) {
            std::string h = "/" + kinds[kind(rng)] + "/" + std::to_string(id(rng));
            if (const int s = sub(rng); s > 0) {
                h += "/m" + std::to_string(s);
            }
            hrefs.insert(h);
            cat.register_item(item(h));
        }
        for (const std::string prefix : {"", "/", "/device/", "/device/1", "/worker/3", "/dataflow/5/", "/nothing"}) {
            std::vector<std::string> expected;
            std::copy_if(hrefs.begin(), hrefs.end(), std::back_inserter(expected),
                         [&](const std::string& h) { return h.rfind(prefix, 0) == 0; });
            std::vector<std::string> actual;
            for (const auto& it : cat.query_prefix(prefix)) {
                actual.push_back(it.href);
                EXPECT_TRUE(it.value(rel::kLastUpdated));
            }
            EXPECT_EQ(actual, expected) << "prefix " << prefix;
        }
    }
}

TEST(Catalog, LastWriterWinsOverRandomWrites) {
    std::mt19937 rng(5);
    Catalog cat;
    std::map<std::string, std::string> last;
    for (int i = 0; i < 2000; ++i) {
        const auto h = "/worker/w" + std::to_string(rng() % 20);
        const auto v = std::to_string(rng());
        cat.register_item(item(h, "urn:echo:rel:v", v));
        last[h] = v;
    }
    for (const auto& [h, v] : last) {
        EXPECT_EQ(cat.get_item(h)->value("urn:echo:rel:v"), v);
    }
}

TEST(Catalog, WatchReturnsLatestChangeOnce) {
    Catalog cat;
    const auto t0 = SysClock::now() - std::chrono::milliseconds(5);
    cat.register_item(item("/device/a", "urn:echo:rel:v", "1"));
    cat.register_item(item("/device/a", "urn:echo:rel:v", "2"));
    const auto changed = cat.watch_prefix("/device/", t0, std::chrono::milliseconds(10));
    ASSERT_EQ(changed.size(), 1u);
    EXPECT_EQ(changed[0].value("urn:echo:rel:v"), "2");
}

TEST(Catalog, WatchTimesOutEmpty) {
    Catalog cat;
    cat.register_item(item("/device/a"));
    const auto start = std::chrono::steady_clock::now();
    const auto changed = cat.watch_prefix("/device/", SysClock::now(), std::chrono::milliseconds(150));
    EXPECT_TRUE(changed.empty());
    EXPECT_GE(std::chrono::steady_clock::now() - start, std::chrono::milliseconds(140));
}

TEST(Catalog, WatchWakesOnWrite) {
    Catalog cat;
    const auto since = SysClock::now();
    std::thread writer([&] {
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
        cat.register_item(item("/worker/w1"));
    });
    const auto changed = cat.watch_prefix("/worker/", since, std::chrono::seconds(5));
    writer.join();
    ASSERT_EQ(changed.size(), 1u);
    EXPECT_EQ(changed[0].href, "/worker/w1");
}

TEST(Catalog, SweepFlagsOnlyOldDevicesAndWorkers) {
    Catalog cat;
    cat.register_item(item("/device/old"));
    cat.register_item(item("/worker/old"));
    cat.register_item(item("/dataflow/old"));
    const auto later = SysClock::now() + std::chrono::seconds(20);
    EXPECT_EQ(cat.sweep_stale(later, std::chrono::seconds(15)), 2u);
    EXPECT_EQ(cat.get_item("/device/old")->value(rel::kStale), "true");
    EXPECT_EQ(cat.get_item("/worker/old")->value(rel::kStale), "true");
    EXPECT_FALSE(cat.get_item("/dataflow/old")->value(rel::kStale));
    EXPECT_EQ(cat.sweep_stale(later, std::chrono::seconds(15)), 0u);
    cat.register_item(item("/device/old"));
    EXPECT_FALSE(cat.get_item("/device/old")->value(rel::kStale));
}

TEST(Catalog, RegisterIfAbsentHonoursExpiry) {
    Catalog cat;
    auto lock = item("/dataflow/u/lock", std::string(rel::kExpires), iso8601_utc(SysClock::now() + std::chrono::seconds(60)));
    EXPECT_TRUE(cat.register_if_absent(lock));
    EXPECT_FALSE(cat.register_if_absent(lock));
    auto expired = item("/dataflow/v/lock", std::string(rel::kExpires), iso8601_utc(SysClock::now() - std::chrono::seconds(1)));
    cat.register_item(expired);
    expired.set(rel::kExpires, iso8601_utc(SysClock::now() + std::chrono::seconds(60)));
    EXPECT_TRUE(cat.register_if_absent(expired));
}

TEST(CatalogJson, RoundTrip) {
    std::mt19937 rng(3);
    Catalog cat;
    for (int i = 0; i < 200; ++i) {
        auto it = item("/device/d" + std::to_string(i));
        for (int k = 0; k < static_cast<int>(rng() % 4); ++k) {
            it.add("urn:echo:rel:k" + std::to_string(k), "v\"" + std::to_string(rng()) + "\n");
        }
        it.add("urn:echo:rel:k0", "duplicate rel");
        cat.register_item(it);
    }
    const auto items = cat.query_prefix("");
    const auto back = items_from_json(nlohmann::json::parse(items_to_json(items).dump()));
    EXPECT_EQ(back, items);
    Catalog other;
    other.load(back);
    EXPECT_EQ(other.query_prefix(""), items);
}

TEST(CatalogJson, RejectsNonCatalogDocuments) {
    EXPECT_THROW(item_from_text("{not json"), ParseError);
    EXPECT_THROW(item_from_json(nlohmann::json{{"nohref", 1}}), ParseError);
    EXPECT_THROW(item_from_json(nlohmann::json{{"href", "/device/a"}, {"item-metadata", 5}}), ParseError);
}

class CatalogRest : public ::testing::Test {
  protected:
    void SetUp() override {
        CatalogServerOptions o;
        o.watch_timeout = std::chrono::milliseconds(300);
        server_ = std::make_unique<CatalogServer>(o);
        server_->start();
    }
    void TearDown() override { server_->stop(); }

    std::unique_ptr<CatalogServer> server_;
};

TEST_F(CatalogRest, StatusCodes) {
    net::HttpClient http(server_->url());
    const auto body = to_json(item("/device/e97e0195acf4")).dump();
    EXPECT_EQ(http.post("/cat", body).status, 201);
    EXPECT_EQ(http.post("/cat", body).status, 200);
    EXPECT_EQ(http.post("/cat", to_json(item("/device/bad href")).dump()).status, 400);
    EXPECT_EQ(http.post("/cat", "{oops").status, 400);
    EXPECT_EQ(http.get("/cat/items?href=%2Fdevice%2Fe97e0195acf4").status, 200);
    EXPECT_EQ(http.get("/cat/items?href=%2Fdevice%2Fnope").status, 404);
    const auto full = http.get("/cat").json();
    EXPECT_TRUE(full.contains("catalogue-metadata"));
    EXPECT_EQ(full["items"].size(), 1u);
    EXPECT_EQ(http.del("/cat/items?href=%2Fdevice%2Fe97e0195acf4").status, 204);
    EXPECT_EQ(http.del("/cat/items?href=%2Fdevice%2Fe97e0195acf4").status, 404);
}

TEST_F(CatalogRest, ClientRoundTrip) {
    CatalogClient client(server_->url());
    EXPECT_TRUE(client.healthy());
    const auto since = iso8601_utc(SysClock::now() - std::chrono::milliseconds(5));
    client.put(item("/worker/w1", std::string(rel::kParent), "d1"));
    client.put(item("/worker/w2", std::string(rel::kParent), "d1"));
    EXPECT_EQ(client.get("/worker/w1")->value(rel::kParent), "d1");
    EXPECT_FALSE(client.get("/worker/none"));
    EXPECT_EQ(client.query("/worker/").size(), 2u);
    EXPECT_EQ(client.watch("/worker/", since, std::chrono::milliseconds(100)).size(), 2u);
    EXPECT_TRUE(client.remove("/worker/w1"));
    EXPECT_FALSE(client.remove("/worker/w1"));
    EXPECT_THROW(client.put(item("no-slash")), ValidationError);
}

TEST(CatalogClientErrors, UnreachableServer) {
    CatalogClient client("http://127.0.0.1:1", {std::chrono::milliseconds(200), std::chrono::milliseconds(200)});
    EXPECT_FALSE(client.healthy());
    EXPECT_THROW(client.get("/device/a"), UnreachableError);
}

TEST(CatalogSnapshot, SurvivesRestart) {
    const auto dir = std::filesystem::temp_directory_path() / ("echo-snap-" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    CatalogServerOptions o;
    o.snapshot = dir / "cat.json";
    {
        CatalogServer s(o);
        s.start();
        s.catalog().register_item(item("/device/keep"));
        s.save_snapshot();
        s.stop();
    }
    CatalogServer s(o);
    s.start();
    EXPECT_TRUE(s.catalog().get_item("/device/keep"));
    s.stop();
    std::filesystem::remove_all(dir);
}
