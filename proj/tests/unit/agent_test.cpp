// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#include <echo/agent/agent.hpp>
#include <echo/catalog/catalog_client.hpp>
#include <echo/catalog/catalog_server.hpp>
#include <echo/common/error.hpp>

#include <gtest/gtest.h>

#include <csignal>
#include <filesystem>

using namespace echo;
using namespace echo::agent;
using namespace std::chrono_literals;

namespace {

class AgentFixture : public ::testing::Test {
  protected:
    void SetUp() override {
        catalog_.start();
        dir_ = std::filesystem::temp_directory_path() /
               ("echo-agent-" + std::to_string(::getpid()) + "-" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
        std::filesystem::remove_all(dir_);
        AgentConfig c;
        c.device.id = "dev1";
        c.device.capacity = {4000, 1024};
        c.catalog_url = catalog_.url();
        c.engine_binary = ECHO_BIN;
        c.workdir = dir_;
        c.heartbeat = 60s;
        agent_ = std::make_unique<Agent>(c);
        agent_->bootstrap("http://127.0.0.1:1", 5s);
    }
    void TearDown() override {
        agent_->shutdown();
        catalog_.stop();
        std::filesystem::remove_all(dir_);
    }

    catalog::CatalogServer catalog_{catalog::CatalogServerOptions{}};
    std::filesystem::path dir_;
    std::unique_ptr<Agent> agent_;
};

}// namespace

TEST_F(AgentFixture, EnforcesDeviceCapacity) {
    const auto a = agent_->spawn_worker({2000, 256}, "");
    const auto b = agent_->spawn_worker({2000, 256}, "");
    EXPECT_NE(a.id, b.id);
    EXPECT_EQ(a.state, WorkerState::up);
    EXPECT_EQ(agent_->allotted().cpu_millis, 4000);
    EXPECT_THROW(agent_->spawn_worker({1, 1}, ""), CapacityError);
    EXPECT_THROW(agent_->spawn_worker({0, 10}, ""), ValidationError);
    agent_->terminate_worker(a.id);
    EXPECT_EQ(agent_->allotted().cpu_millis, 2000);
    EXPECT_NO_THROW(agent_->spawn_worker({2000, 256}, ""));
}

TEST_F(AgentFixture, RegistersDeviceAndWorkers) {
    const auto w = agent_->spawn_worker({1000, 128}, "");
    catalog::CatalogClient client(catalog_.url());
    EXPECT_TRUE(client.get("/device/dev1"));
    const auto item = client.get("/worker/" + w.id);
    ASSERT_TRUE(item);
    EXPECT_EQ(item->value_or(catalog::rel::kState, ""), "up");
}

TEST_F(AgentFixture, KilledWorkerIsMarkedDown) {
    const auto w = agent_->spawn_worker({1000, 128}, "");
    ASSERT_GT(w.pid, 0);
    ::kill(w.pid, SIGKILL);
    std::this_thread::sleep_for(200ms);
    agent_->monitor_once();
    catalog::CatalogClient client(catalog_.url());
    EXPECT_EQ(client.get("/worker/" + w.id)->value_or(catalog::rel::kState, ""), "down");
    EXPECT_EQ(agent_->allotted().cpu_millis, 0);
}

TEST(DeviceInfo, RejectsBadConfig) {
    EXPECT_THROW(DeviceInfo::from_json({{"class", "mainframe"}}).validate(), ValidationError);
    const auto d = DeviceInfo::from_json({{"id", "x"}, {"class", "cloud"}, {"capacity", {{"cpu_millis", 8000}}}});
    EXPECT_EQ(d.device_class, "cloud");
}
