// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#include <echo/common/error.hpp>
#include <echo/common/ids.hpp>
#include <echo/common/subprocess.hpp>
#include <echo/databatch/tuple.hpp>
#include <echo/databatch/wrappers.hpp>
#include <echo/wrappers/exec.hpp>

#include <cstdlib>
#include <sstream>

#include <unistd.h>

namespace echo::wrappers {

namespace fs = std::filesystem;
using data::DataBatch;
using Json = nlohmann::json;

ExecSpec ExecSpec::from_json(const Json& config) {
    ExecSpec s;
    s.command = config.value("command", std::string());
    if (config.contains("args")) {
        if (!config["args"].is_array()) {
            throw ValidationError("exec args must be a list of strings");
        }
        s.args = config["args"].get<std::vector<std::string>>();
    } else {
        s.args = {"{input_file}", "{output_file}"};
    }
    s.workdir = config.value("workdir", std::string());
    s.timeout = std::chrono::milliseconds(config.value("timeout_ms", std::int64_t{30000}));
    s.expected_exit = config.value("expected_exit", 0);
    const auto fmt = config.value("output_format", std::string("tuples"));
    if (fmt != "tuples" && fmt != "opaque") {
        throw ValidationError("exec output_format must be tuples or opaque");
    }
    s.tuples_output = fmt == "tuples";
    return s;
}

void ExecSpec::validate() const {
    if (command.empty()) {
        throw ValidationError("exec needs a command");
    }
    auto executable = [](const fs::path& p) { return fs::is_regular_file(p) && ::access(p.c_str(), X_OK) == 0; };
    if (command.find('/') != std::string::npos) {
        if (!executable(command)) {
            throw ValidationError("exec command " + command + " is not an executable file");
        }
        return;
    }
    const char* path = std::getenv("PATH");
    std::stringstream dirs(path ? path : "/usr/bin:/bin");
    for (std::string dir; std::getline(dirs, dir, ':');) {
        if (!dir.empty() && executable(fs::path(dir) / command)) {
            return;
        }
    }
    throw ValidationError("exec command " + command + " not found on PATH");
}

ExecOutcome exec_process(const ExecSpec& spec, const DataBatch& input, const fs::path& scratch) {
    fs::create_directories(scratch);
    const auto stem = "exec-" + random_hex(12);
    const auto in_file = scratch / (stem + ".in");
    const auto out_file = scratch / (stem + ".out");
    struct Cleanup {
        fs::path a, b;
        ~Cleanup() {
            data::remove_batch_file(a);
            data::remove_batch_file(b);
        }
    } cleanup{in_file, out_file};

    data::batch_to_file_at(input, in_file);
    std::vector<std::string> argv{spec.command};
    for (auto arg : spec.args) {
        for (const auto& [key, val] : {std::pair{std::string("{input_file}"), in_file.string()},
                                       std::pair{std::string("{output_file}"), out_file.string()}}) {
            for (auto pos = arg.find(key); pos != std::string::npos; pos = arg.find(key, pos + val.size())) {
                arg.replace(pos, key.size(), val);
            }
        }
        argv.push_back(std::move(arg));
    }
    const auto result = run_command(argv, spec.workdir.empty() ? scratch : spec.workdir, spec.timeout);
    if (result.timed_out) {
        return {std::nullopt, spec.command + " timed out after " + std::to_string(spec.timeout.count()) + " ms"};
    }
    if (result.exit_code != spec.expected_exit) {
        return {std::nullopt, spec.command + " exited with " + std::to_string(result.exit_code)};
    }
    if (!fs::exists(out_file)) {
        return {std::nullopt, spec.command + " wrote no output file"};
    }
    // The output file carries no sidecar; attributes come from the input.
    auto content = data::read_file(out_file);
    const std::uint64_t count = spec.tuples_output ? data::count_lines(content) : 0;
    data::Attributes attrs;
    for (const auto& [k, v] : input.attributes()) {
        if (k.rfind("batch.", 0) != 0) {
            attrs.emplace(k, v);
        }
    }
    if (fs::exists(data::sidecar_path(out_file))) {
        const auto own = data::file_to_batch(out_file).attributes();
        for (const auto& [k, v] : own) {
            if (k.rfind("batch.", 0) != 0) {
                attrs.insert_or_assign(k, v);
            }
        }
    }
    return {DataBatch::make(std::move(content), count, std::move(attrs)), {}};
}

namespace {

class ExecLogic final : public engine::ProcessorLogic {
  public:
    ExecLogic(ExecSpec spec, fs::path scratch) : spec_(std::move(spec)), scratch_(std::move(scratch)) {}

    void on_batch(const DataBatch& batch, engine::Emitter& out) override {
        auto r = exec_process(spec_, batch, scratch_);
        ++runs_;
        if (!r.output) {
            ++failures_;
            out.emit_error(batch, r.error);
            return;
        }
        out.emit_batch(*r.output);
    }

    void on_tuple(const data::EventTuple& t, engine::Emitter& out) override {
        on_batch(DataBatch::make(data::encode_tuple(t) + "\n", 1, out.input_attributes()), out);
    }

    nlohmann::json stats() const override { return {{"runs", runs_}, {"failures", failures_}}; }

  private:
    ExecSpec spec_;
    fs::path scratch_;
    std::uint64_t runs_ = 0;
    std::uint64_t failures_ = 0;
};

}// namespace

std::unique_ptr<engine::ProcessorLogic> make_exec(const flow::ProcessorSpec& spec, const engine::ProcessorContext& ctx) {
    auto s = ExecSpec::from_json(spec.config);
    s.validate();
    return std::make_unique<ExecLogic>(std::move(s), ctx.workdir);
}

}// namespace echo::wrappers
