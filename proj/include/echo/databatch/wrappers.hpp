// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <echo/databatch/batch.hpp>

#include <cstdint>
#include <filesystem>

namespace echo::data {

struct FileRef {
    std::filesystem::path path;
    std::uint64_t size_bytes = 0;
};

/// Sidecar holding the attribute map of a file written from a batch.
std::filesystem::path sidecar_path(const std::filesystem::path& file);

/// Writes the content to "<dir>/<batch id>.dat" and the attributes to its
/// sidecar. Throws IoError naming the path.
FileRef batch_to_file(const DataBatch& batch, const std::filesystem::path& dir);
/// Same, at an explicit path.
FileRef batch_to_file_at(const DataBatch& batch, const std::filesystem::path& file);

/// Reads a file back. Without a sidecar the file counts as externally produced
/// and gets fresh attributes (batch.count=0). Throws IoError when the file is
/// missing and ParseError on a corrupt sidecar.
DataBatch file_to_batch(const FileRef& ref);
DataBatch file_to_batch(const std::filesystem::path& file);

/// Removes the file and its sidecar, ignoring absence.
void remove_batch_file(const std::filesystem::path& file);

std::string read_file(const std::filesystem::path& file);
void write_file(const std::filesystem::path& file, std::string_view content);

}// namespace echo::data
