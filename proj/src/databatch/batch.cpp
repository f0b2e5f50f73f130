// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#include <echo/common/error.hpp>
#include <echo/common/ids.hpp>
#include <echo/common/time.hpp>
#include <echo/databatch/batch.hpp>

#include <charconv>

namespace echo::data {

namespace {

std::uint64_t parse_count(const Attributes& attrs) {
    const auto it = attrs.find(attr::kCount);
    if (it == attrs.end()) {
        throw ValidationError("batch lacks batch.count");
    }
    std::uint64_t n = 0;
    const auto* end = it->second.data() + it->second.size();
    const auto [ptr, ec] = std::from_chars(it->second.data(), end, n);
    if (ec != std::errc() || ptr != end) {
        throw ValidationError("batch.count '" + it->second + "' is not a non-negative integer");
    }
    return n;
}

}// namespace

DataBatch::DataBatch(Attributes attributes, std::string content) {
    for (const auto key : {attr::kId, attr::kCreated}) {
        const auto it = attributes.find(key);
        if (it == attributes.end() || it->second.empty()) {
            throw ValidationError("batch lacks " + std::string(key));
        }
    }
    const auto count = parse_count(attributes);
    data_ = std::make_shared<const Data>(Data{std::move(attributes), std::move(content), count});
}

DataBatch DataBatch::make(std::string content, std::uint64_t count, Attributes extra) {
    extra.insert_or_assign(std::string(attr::kId), new_batch_id());
    extra.insert_or_assign(std::string(attr::kCreated), now_iso8601());
    extra.insert_or_assign(std::string(attr::kCount), std::to_string(count));
    return DataBatch(std::make_shared<const Data>(Data{std::move(extra), std::move(content), count}));
}

DataBatch DataBatch::end_of_stream() { return make({}, 0, {{std::string(attr::kEos), "1"}}); }

const std::string& DataBatch::id() const { return data_->attributes.find(attr::kId)->second; }

std::optional<std::string> DataBatch::attribute(std::string_view key) const {
    const auto it = data_->attributes.find(key);
    if (it == data_->attributes.end()) {
        return std::nullopt;
    }
    return it->second;
}

bool DataBatch::is_eos() const {
    const auto it = data_->attributes.find(attr::kEos);
    return it != data_->attributes.end() && it->second == "1";
}

DataBatch DataBatch::with_attributes(const Attributes& extra) const {
    Attributes attrs = data_->attributes;
    for (const auto& [k, v] : extra) {
        attrs.insert_or_assign(k, v);
    }
    return DataBatch(std::move(attrs), data_->content);
}

DataBatch DataBatch::restamped() const {
    Attributes attrs = data_->attributes;
    attrs.insert_or_assign(std::string(attr::kId), new_batch_id());
    attrs.insert_or_assign(std::string(attr::kCreated), now_iso8601());
    return DataBatch(std::make_shared<const Data>(Data{std::move(attrs), data_->content, data_->count}));
}

bool DataBatch::operator==(const DataBatch& other) const {
    return data_ == other.data_ || (data_->attributes == other.data_->attributes && data_->content == other.data_->content);
}

}// namespace echo::data
