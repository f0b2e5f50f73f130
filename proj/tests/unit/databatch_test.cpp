// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#include "support/oracles.hpp"

#include <echo/common/error.hpp>
#include <echo/common/ids.hpp>
#include <echo/common/time.hpp>
#include <echo/databatch/batch.hpp>
#include <echo/databatch/tuple.hpp>
#include <echo/databatch/wrappers.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <unordered_set>

using namespace echo;
using namespace echo::data;

namespace {

std::vector<EventTuple> seq(std::initializer_list<double> values) {
    std::vector<EventTuple> out;
    std::int64_t t = 0;
    for (double v : values) {
        out.push_back({"x", v, "u", t++});
    }
    return out;
}

std::vector<EventTuple> replay(const std::vector<DataBatch>& batches) {
    std::vector<EventTuple> out;
    for (const auto& b : batches) {
        const auto part = batch_to_stream(b);
        out.insert(out.end(), part.begin(), part.end());
    }
    return out;
}

class ScratchDir : public ::testing::Test {
  protected:
    void SetUp() override {
        dir_ = std::filesystem::temp_directory_path() /
               ("echo-db-" + std::to_string(::getpid()) + "-" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
        std::filesystem::create_directories(dir_);
    }
    void TearDown() override { std::filesystem::remove_all(dir_); }
    std::filesystem::path dir_;
};

}// namespace

TEST(DataBatch, MandatoryAttributes) {
    const auto b = DataBatch::make("", 0);
    EXPECT_FALSE(b.id().empty());
    EXPECT_TRUE(parse_iso8601(*b.attribute(attr::kCreated)));
    EXPECT_EQ(b.attribute(attr::kCount), "0");
    EXPECT_TRUE(b.opaque());
    EXPECT_THROW(DataBatch(Attributes{{"batch.id", "x"}}, ""), ValidationError);
    EXPECT_THROW(DataBatch(Attributes{{"batch.id", "x"}, {"batch.created", "t"}, {"batch.count", "two"}}, ""), ValidationError);
}

TEST(DataBatch, IdsAreUniqueOverAMillion) {
    std::unordered_set<std::string> ids;
    ids.reserve(1'000'000);
    for (int i = 0; i < 1'000'000; ++i) {
        ids.insert(new_batch_id());
    }
    EXPECT_EQ(ids.size(), 1'000'000u);
}

TEST(DataBatch, RestampAndAttributes) {
    const auto b = DataBatch::make("abc", 0, {{"k", "v"}});
    const auto r = b.restamped();
    EXPECT_NE(r.id(), b.id());
    EXPECT_EQ(r.content(), "abc");
    EXPECT_EQ(r.attribute("k"), "v");
    EXPECT_EQ(b.with_attributes({{"k", "w"}}).attribute("k"), "w");
    EXPECT_TRUE(DataBatch::end_of_stream().is_eos());
}

TEST(Tuple, WireFormRoundTrip) {
    const EventTuple t{"urn:dev:1:temperature", 21.375, "Cel", 1500000000000};
    const auto line = encode_tuple(t);
    const auto doc = nlohmann::json::parse(line);
    EXPECT_EQ(doc["n"], t.name);
    EXPECT_EQ(doc["u"], t.unit);
    EXPECT_EQ(decode_tuple(line), t);
    EXPECT_THROW(encode_tuple({"x", 1.0, "", -1}), ValidationError);
    EXPECT_THROW(decode_tuple("{\"n\":1}"), ParseError);
}

TEST(StreamToBatch, CountWindowsWithFlush) {
    std::mt19937 rng(1);
    const auto events = echo::testing::random_tuples(rng, 10);
    const auto batches = stream_to_batch(events, WindowPolicy::count(4));
    ASSERT_EQ(batches.size(), 3u);
    EXPECT_EQ(batches[0].count(), 4u);
    EXPECT_EQ(batches[1].count(), 4u);
    EXPECT_EQ(batches[2].count(), 2u);
    EXPECT_EQ(stream_to_batch(events, WindowPolicy::count(4, false)).size(), 2u);
}

TEST(StreamToBatch, EmptyInput) {
    EXPECT_TRUE(stream_to_batch({}, WindowPolicy::count(4)).empty());
}

TEST(StreamToBatch, ReplaysInOrder) {
    const auto events = seq({1, 2, 3, 4, 5, 6});
    const auto batches = stream_to_batch(events, WindowPolicy::count(3));
    ASSERT_EQ(batches.size(), 2u);
    EXPECT_EQ(replay(batches), events);
}

TEST(StreamToBatch, TimeWindowClosesOnTick) {
    StreamBatcher b(WindowPolicy::time(100));
    const auto t0 = StreamBatcher::Clock::now();
    EXPECT_FALSE(b.push({"x", 1, "", 0}, t0));
    EXPECT_FALSE(b.push({"x", 2, "", 0}, t0 + std::chrono::milliseconds(50)));
    EXPECT_FALSE(b.tick(t0 + std::chrono::milliseconds(99)));
    const auto out = b.tick(t0 + std::chrono::milliseconds(100));
    ASSERT_TRUE(out);
    EXPECT_EQ(out->count(), 2u);
    EXPECT_FALSE(b.close());
}

TEST(StreamToBatch, PolicyValidation) {
    EXPECT_THROW(WindowPolicy::count(0).validate(), ValidationError);
    EXPECT_THROW(WindowPolicy::time(0).validate(), ValidationError);
    EXPECT_EQ(WindowPolicy::from_json(nullptr).count_n, 50u);
    EXPECT_EQ(WindowPolicy::from_json({{"mode", "time"}, {"ms", 250}}).duration_ms, 250);
}

TEST(BatchToStream, IntegrityAndParseErrors) {
    const auto line = encode_tuple({"x", 1, "", 0});
    const DataBatch short_batch(
        Attributes{{"batch.id", "a"}, {"batch.created", now_iso8601()}, {"batch.count", "3"}}, line + "\n" + line + "\n");
    EXPECT_THROW(batch_to_stream(short_batch), IntegrityError);
    const DataBatch bad(Attributes{{"batch.id", "b"}, {"batch.created", now_iso8601()}, {"batch.count", "2"}},
                        line + "\n{broken\n");
    try {
        batch_to_stream(bad);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("2"), std::string::npos);
    }
}

TEST(BatchToStream, RandomRoundTrips) {
    std::mt19937 rng(99);
    for (int i = 0; i < 100; ++i) {
        const auto events = echo::testing::random_tuples(rng, rng() % 2000);
        EXPECT_EQ(replay(stream_to_batch(events, WindowPolicy::count(std::max<std::size_t>(events.size(), 1)))), events);
        const auto n = 1 + rng() % 64;
        const auto batches = stream_to_batch(events, WindowPolicy::count(n));
        std::uint64_t total = 0;
        for (const auto& b : batches) {
            total += b.count();
        }
        EXPECT_EQ(total, events.size());
        EXPECT_EQ(replay(batches), events);
    }
}

TEST_F(ScratchDir, BatchToFileWritesContentAndSidecar) {
    const auto b = DataBatch::make(std::string(1024, 'x'), 0, {{"origin", "cam0"}});
    const auto ref = batch_to_file(b, dir_);
    EXPECT_EQ(ref.size_bytes, 1024u);
    EXPECT_EQ(std::filesystem::file_size(ref.path), 1024u);
    EXPECT_TRUE(std::filesystem::exists(sidecar_path(ref.path)));
    EXPECT_EQ(file_to_batch(ref), b);
}

TEST_F(ScratchDir, EmptyContent) {
    const auto b = DataBatch::make("", 0);
    const auto ref = batch_to_file(b, dir_);
    EXPECT_EQ(ref.size_bytes, 0u);
    EXPECT_EQ(file_to_batch(ref), b);
}

TEST_F(ScratchDir, ExternalFileWithoutSidecar) {
    write_file(dir_ / "ext.bin", "hello");
    const auto b = file_to_batch(dir_ / "ext.bin");
    EXPECT_EQ(b.content(), "hello");
    EXPECT_EQ(b.count(), 0u);
    EXPECT_FALSE(b.id().empty());
}

TEST_F(ScratchDir, MissingFile) {
    EXPECT_THROW(file_to_batch(dir_ / "nope"), IoError);
}

TEST_F(ScratchDir, RandomFileRoundTrips) {
    std::mt19937 rng(4);
    for (int i = 0; i < 50; ++i) {
        const auto events = echo::testing::random_tuples(rng, rng() % 500);
        for (const auto& b : stream_to_batch(events, WindowPolicy::count(1 + rng() % 100))) {
            const auto ref = batch_to_file(b, dir_);
            EXPECT_EQ(file_to_batch(ref), b);
            remove_batch_file(ref.path);
        }
    }
    EXPECT_TRUE(std::filesystem::is_empty(dir_));
}
