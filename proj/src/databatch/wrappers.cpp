// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#include <echo/common/error.hpp>
#include <echo/databatch/wrappers.hpp>

#include <json.hpp>

#include <fstream>

namespace echo::data {

namespace fs = std::filesystem;
using Json = nlohmann::json;

fs::path sidecar_path(const fs::path& file) {
    auto p = file;
    p += ".attrs.json";
    return p;
}

std::string read_file(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw IoError("cannot read " + file.string());
    }
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw IoError("error reading " + file.string());
    }
    return content;
}

void write_file(const fs::path& file, std::string_view content) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + file.string());
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
        throw IoError("error writing " + file.string());
    }
}

FileRef batch_to_file_at(const DataBatch& batch, const fs::path& file) {
    write_file(file, batch.content());
    Json attrs = Json::object();
    for (const auto& [k, v] : batch.attributes()) {
        attrs[k] = v;
    }
    write_file(sidecar_path(file), attrs.dump());
    return FileRef{file, batch.content().size()};
}

FileRef batch_to_file(const DataBatch& batch, const fs::path& dir) {
    return batch_to_file_at(batch, dir / (batch.id() + ".dat"));
}

DataBatch file_to_batch(const FileRef& ref) { return file_to_batch(ref.path); }

DataBatch file_to_batch(const fs::path& file) {
    auto content = read_file(file);
    const auto side = sidecar_path(file);
    std::error_code ec;
    if (!fs::exists(side, ec)) {
        return DataBatch::make(std::move(content), 0, {{"file.name", file.filename().string()}});
    }
    Attributes attrs;
    try {
        const auto doc = Json::parse(read_file(side));
        for (const auto& [k, v] : doc.items()) {
            attrs.emplace(k, v.get<std::string>());
        }
    } catch (const Json::exception& e) {
        throw ParseError("corrupt sidecar " + side.string() + ": " + e.what());
    }
    return DataBatch(std::move(attrs), std::move(content));
}

void remove_batch_file(const fs::path& file) {
    std::error_code ec;
    fs::remove(file, ec);
    fs::remove(sidecar_path(file), ec);
}

}// namespace echo::data
