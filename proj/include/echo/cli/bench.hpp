// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <echo/cli/testbed.hpp>

#include <json.hpp>

#include <filesystem>
#include <string>

namespace echo::cli {

struct BenchOptions {
    TestbedConfig testbed;
    std::filesystem::path outdir;
    std::filesystem::path echo_binary;
    double duration_s = 60;///< rebalance: whole run, trigger at half; stats: measured window
    double rate = 0;///< source records per second; 0 picks the bench default
    bool rebalance = true;
};

/// Verdict thresholds.
inline constexpr double kMinRateRatio = 2.0;
inline constexpr double kDipFraction = 0.8;
inline constexpr double kDipWindowS = 10.0;
inline constexpr double kMinSustainedFraction = 0.9;

/// ETL-shaped flow on throttled edge workers; at half time unthrottled cloud
/// workers are added and the flow is rebalanced. Writes report.json and
/// rates.csv to the output directory and returns the report.
nlohmann::json bench_rebalance(const BenchOptions& options);

/// STATS-shaped flow (filter / aggregate / count branches, the filter branch
/// running through a bridge to a stub engine) on unthrottled workers.
nlohmann::json bench_stats(const BenchOptions& options);

/// Names of the failed verdicts in a report.
std::vector<std::string> failed_verdicts(const nlohmann::json& report);

/// Writes `n` single-entry SenML records (deterministic for a seed).
void write_senml(const std::filesystem::path& path, std::size_t n, unsigned seed = 42);

}// namespace echo::cli
