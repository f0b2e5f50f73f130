// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <echo/engine/processor.hpp>

#include <string>

namespace echo::wrappers {

inline constexpr const char* kReplyToHeader = "X-Echo-Reply-To";

struct BridgeSpec {
    std::string endpoint;///< remote engine URL
    std::string ingress;///< link id the remote accepts pushes on
    std::string egress;///< link id the remote serves results on
    std::chrono::milliseconds drain_timeout{10000};

    static BridgeSpec from_json(const nlohmann::json& config);
};

/// Processor "bridge": pushes input batches to a remote engine speaking the
/// link protocol and emits whatever the remote serves back. At end of stream
/// it waits (up to drain_timeout) until as many batches came back as went out.
std::unique_ptr<engine::ProcessorLogic> make_bridge(const flow::ProcessorSpec& spec, const engine::ProcessorContext& ctx);

}// namespace echo::wrappers
