// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>

namespace echo {

std::string base64_encode(std::string_view bytes);

/// Throws ParseError on malformed input.
std::string base64_decode(std::string_view text);

}// namespace echo
