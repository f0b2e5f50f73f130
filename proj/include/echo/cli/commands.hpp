// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <echo/catalog/catalog_server.hpp>

#include <filesystem>
#include <string>

namespace echo::cli {

/// Exit codes of the client commands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitApiError = 1;
inline constexpr int kExitUnreachable = 2;

int cmd_submit(const std::string& master_url, const std::filesystem::path& file);
int cmd_status(const std::string& master_url, const std::string& uuid, bool json);
int cmd_stop(const std::string& master_url, const std::string& uuid);
int cmd_rebalance(const std::string& master_url, const std::string& uuid);
int cmd_list(const std::string& master_url);

/// Runs the catalog service until SIGTERM.
int run_catalog(catalog::CatalogServerOptions options);

/// `testbed up`: boots, writes <workdir>/testbed.json, runs until SIGTERM.
int cmd_testbed_up(const std::filesystem::path& config);
/// `testbed down`: signals the `testbed up` process recorded for the config.
int cmd_testbed_down(const std::filesystem::path& config);

int cmd_bench(const std::string& which, const std::filesystem::path& config, const std::filesystem::path& outdir, double duration_s,
              double rate, bool rebalance);

/// Value of an ECHO_* variable or the fallback.
std::string env_or(const char* name, const std::string& fallback);

}// namespace echo::cli
