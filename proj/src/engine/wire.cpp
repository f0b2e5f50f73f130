// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#include <echo/common/base64.hpp>
#include <echo/common/error.hpp>
#include <echo/engine/wire.hpp>

namespace echo::engine {

using Json = nlohmann::json;
using data::DataBatch;

Json to_envelope(const DataBatch& batch) {
    Json attrs = Json::object();
    for (const auto& [k, v] : batch.attributes()) {
        attrs[k] = v;
    }
    return Json{{"batch_id", batch.id()}, {"attributes", std::move(attrs)}, {"content_b64", base64_encode(batch.content())}};
}

DataBatch from_envelope(const Json& doc) {
    try {
        data::Attributes attrs;
        for (const auto& [k, v] : doc.at("attributes").items()) {
            attrs.emplace(k, v.get<std::string>());
        }
        const auto id = doc.at("batch_id").get<std::string>();
        const auto it = attrs.find(data::attr::kId);
        if (it == attrs.end()) {
            attrs.emplace(std::string(data::attr::kId), id);
        } else if (it->second != id) {
            throw ParseError("envelope batch_id " + id + " disagrees with batch.id " + it->second);
        }
        return DataBatch(std::move(attrs), base64_decode(doc.at("content_b64").get<std::string>()));
    } catch (const Json::exception& e) {
        throw ParseError(std::string("malformed batch envelope: ") + e.what());
    } catch (const ValidationError& e) {
        throw ParseError(std::string("malformed batch envelope: ") + e.what());
    }
}

Json to_envelopes(const std::vector<DataBatch>& batches) {
    Json arr = Json::array();
    for (const auto& b : batches) {
        arr.push_back(to_envelope(b));
    }
    return arr;
}

std::vector<DataBatch> from_envelopes(const Json& array) {
    if (!array.is_array()) {
        throw ParseError("expected an array of batch envelopes");
    }
    std::vector<DataBatch> out;
    out.reserve(array.size());
    for (const auto& e : array) {
        out.push_back(from_envelope(e));
    }
    return out;
}

}// namespace echo::engine
