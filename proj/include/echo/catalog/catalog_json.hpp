// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <echo/catalog/catalog.hpp>

#include <json.hpp>

#include <vector>

namespace echo::catalog {

/// {"href":..., "item-metadata":[{"rel":...,"val":...}, ...]}
nlohmann::json to_json(const CatalogItem& item);

/// Throws ParseError when the document is not catalog JSON.
CatalogItem item_from_json(const nlohmann::json& doc);
CatalogItem item_from_text(const std::string& text);

nlohmann::json items_to_json(const std::vector<CatalogItem>& items);
std::vector<CatalogItem> items_from_json(const nlohmann::json& doc);

/// The full Hypercat document: catalogue-metadata plus items.
nlohmann::json catalogue_document(const std::vector<CatalogItem>& items);

}// namespace echo::catalog
