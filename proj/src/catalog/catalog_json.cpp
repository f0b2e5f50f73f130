// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#include <echo/catalog/catalog_json.hpp>
#include <echo/common/error.hpp>

namespace echo::catalog {

using Json = nlohmann::json;

Json to_json(const CatalogItem& item) {
    Json meta = Json::array();
    for (const auto& r : item.metadata) {
        meta.push_back({{"rel", r.rel}, {"val", r.val}});
    }
    return Json{{"href", item.href}, {"item-metadata", std::move(meta)}};
}

CatalogItem item_from_json(const Json& doc) {
    if (!doc.is_object()) {
        throw ParseError("catalog item must be a JSON object");
    }
    const auto href = doc.find("href");
    if (href == doc.end() || !href->is_string()) {
        throw ParseError("catalog item lacks a string \"href\"");
    }
    CatalogItem item;
    item.href = href->get<std::string>();
    const auto meta = doc.find("item-metadata");
    if (meta == doc.end()) {
        return item;
    }
    if (!meta->is_array()) {
        throw ParseError("\"item-metadata\" must be an array");
    }
    for (const auto& r : *meta) {
        if (!r.is_object() || !r.contains("rel") || !r["rel"].is_string() || !r.contains("val")) {
            throw ParseError("each relation needs a string \"rel\" and a \"val\"");
        }
        const auto& val = r["val"];
        item.metadata.push_back({r["rel"].get<std::string>(), val.is_string() ? val.get<std::string>() : val.dump()});
    }
    return item;
}

CatalogItem item_from_text(const std::string& text) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ParseError(std::string("catalog payload is not JSON: ") + e.what());
    }
    return item_from_json(doc);
}

Json items_to_json(const std::vector<CatalogItem>& items) {
    Json arr = Json::array();
    for (const auto& item : items) {
        arr.push_back(to_json(item));
    }
    return arr;
}

std::vector<CatalogItem> items_from_json(const Json& doc) {
    const Json* arr = &doc;
    if (doc.is_object() && doc.contains("items")) {
        arr = &doc["items"];
    }
    if (!arr->is_array()) {
        throw ParseError("expected an array of catalog items");
    }
    std::vector<CatalogItem> out;
    out.reserve(arr->size());
    for (const auto& item : *arr) {
        out.push_back(item_from_json(item));
    }
    return out;
}

Json catalogue_document(const std::vector<CatalogItem>& items) {
    return Json{{"catalogue-metadata",
                 Json::array({{{"rel", "urn:X-hypercat:rels:isContentType"}, {"val", "application/vnd.hypercat.catalogue+json"}},
                              {{"rel", std::string(rel::kDescription)}, {"val", "echo resource directory"}}})},
                {"items", items_to_json(items)}};
}

}// namespace echo::catalog
