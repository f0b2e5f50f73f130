// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace echo::data {

namespace attr {
inline constexpr std::string_view kId = "batch.id";
inline constexpr std::string_view kCreated = "batch.created";
inline constexpr std::string_view kCount = "batch.count";
/// Present (value "1") on the end-of-stream marker batch.
inline constexpr std::string_view kEos = "echo.eos";
}// namespace attr

using Attributes = std::map<std::string, std::string, std::less<>>;

/// The unit of data movement: an attribute map plus opaque content bytes.
/// Immutable; copies share the underlying storage.
class DataBatch {
  public:
    /// Wraps existing attributes verbatim. Throws ValidationError when the
    /// mandatory batch.* attributes are missing or batch.count is not a number.
    DataBatch(Attributes attributes, std::string content);

    /// A new batch with a fresh id and creation time.
    static DataBatch make(std::string content, std::uint64_t count, Attributes extra = {});
    static DataBatch end_of_stream();

    const Attributes& attributes() const noexcept { return data_->attributes; }
    const std::string& content() const noexcept { return data_->content; }

    const std::string& id() const;
    std::uint64_t count() const noexcept { return data_->count; }
    std::optional<std::string> attribute(std::string_view key) const;
    bool is_eos() const;
    bool opaque() const noexcept { return data_->count == 0; }

    /// Copy with the given attributes added or replaced.
    DataBatch with_attributes(const Attributes& extra) const;
    /// Copy with a fresh batch.id and batch.created.
    DataBatch restamped() const;

    bool operator==(const DataBatch& other) const;

  private:
    struct Data {
        Attributes attributes;
        std::string content;
        std::uint64_t count = 0;
    };
    explicit DataBatch(std::shared_ptr<const Data> data) : data_(std::move(data)) {}

    std::shared_ptr<const Data> data_;
};

}// namespace echo::data
