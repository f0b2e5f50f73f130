// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <echo/engine/processor.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace echo::wrappers {

/// Expands one SenML record ({"bn","bt","bu","e":[{"n","u","v","t"}]}) into
/// tuples. Names are bn + n, times bt + t, units fall back to bu. Throws
/// ParseError for a malformed record.
std::vector<data::EventTuple> parse_senml_record(std::string_view line);

/// Registers cep, exec, bridge and every builtin:* kind.
void register_all(engine::ProcessorRegistry& registry);

}// namespace echo::wrappers
