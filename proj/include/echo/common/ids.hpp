// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

namespace echo {

/// Process-unique and, with overwhelming probability, globally unique batch id:
/// a random 64-bit process nonce joined with a per-process sequence number.
std::string new_batch_id();

/// RFC 4122 version-4 UUID string.
std::string new_uuid();

/// `n` random lowercase hex digits.
std::string random_hex(std::size_t n);

}// namespace echo
