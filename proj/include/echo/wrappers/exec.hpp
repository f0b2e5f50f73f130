// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <echo/databatch/batch.hpp>
#include <echo/engine/processor.hpp>

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

namespace echo::wrappers {

struct ExecSpec {
    std::string command;
    std::vector<std::string> args;///< may contain {input_file} and {output_file}
    std::filesystem::path workdir;
    std::chrono::milliseconds timeout{30000};
    int expected_exit = 0;
    bool tuples_output = true;///< output_format "tuples" (count lines) or "opaque"

    static ExecSpec from_json(const nlohmann::json& config);
    /// Throws ValidationError when the command cannot be found or executed.
    void validate() const;
};

struct ExecOutcome {
    std::optional<data::DataBatch> output;
    std::string error;///< set when output is empty
};

/// Writes `input` to a file, runs the command on it and reads the output file
/// back. Input attributes are carried over; the output's own attributes win.
/// Temporary files are removed whatever happens.
ExecOutcome exec_process(const ExecSpec& spec, const data::DataBatch& input, const std::filesystem::path& scratch);

/// Processor "exec".
std::unique_ptr<engine::ProcessorLogic> make_exec(const flow::ProcessorSpec& spec, const engine::ProcessorContext& ctx);

}// namespace echo::wrappers
