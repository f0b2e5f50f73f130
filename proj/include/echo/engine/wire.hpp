// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <echo/databatch/batch.hpp>

#include <json.hpp>

#include <string>
#include <vector>

namespace echo::engine {

inline constexpr const char* kDeviceHeader = "X-Echo-Device";

/// {"batch_id":..., "attributes":{...}, "content_b64":...}
nlohmann::json to_envelope(const data::DataBatch& batch);
/// Throws ParseError on a malformed envelope.
data::DataBatch from_envelope(const nlohmann::json& doc);

nlohmann::json to_envelopes(const std::vector<data::DataBatch>& batches);
std::vector<data::DataBatch> from_envelopes(const nlohmann::json& array);

}// namespace echo::engine
