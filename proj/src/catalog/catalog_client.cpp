// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#include <echo/catalog/catalog_client.hpp>
#include <echo/catalog/catalog_json.hpp>
#include <echo/common/error.hpp>

namespace echo::catalog {

using net::url_encode;

void raise_for(const net::HttpResult& result, const std::string& what) {
    const auto msg = what + ": " + result.message();
    if (!result.reached() || result.status >= 500) {
        throw UnreachableError(msg);
    }
    switch (result.status) {
        case 400: throw ValidationError(msg);
        case 404: throw NotFound(msg);
        case 409:
        case 412: throw Conflict(msg);
        default: throw Error(msg);
    }
}

CatalogClient::CatalogClient(std::string base_url, net::ClientOptions options) : http_(std::move(base_url), options) {}

void CatalogClient::put(const CatalogItem& item) const {
    const auto r = http_.post_json("/cat", to_json(item));
    if (!r.ok()) {
        raise_for(r, "register " + item.href);
    }
}

bool CatalogClient::put_if_absent(const CatalogItem& item) const {
    const auto r = http_.post_json("/cat?if_absent=1", to_json(item));
    if (r.status == 412) {
        return false;
    }
    if (!r.ok()) {
        raise_for(r, "register " + item.href);
    }
    return true;
}

std::optional<CatalogItem> CatalogClient::get(const std::string& href) const {
    const auto r = http_.get("/cat/items?href=" + url_encode(href));
    if (r.status == 404) {
        return std::nullopt;
    }
    if (!r.ok()) {
        raise_for(r, "get " + href);
    }
    return item_from_json(r.json());
}

std::vector<CatalogItem> CatalogClient::query(const std::string& prefix) const {
    const auto r = http_.get("/cat/items?prefix=" + url_encode(prefix));
    if (!r.ok()) {
        raise_for(r, "query " + prefix);
    }
    return items_from_json(r.json());
}

bool CatalogClient::remove(const std::string& href) const {
    const auto r = http_.del("/cat/items?href=" + url_encode(href));
    if (r.status == 404) {
        return false;
    }
    if (!r.ok()) {
        raise_for(r, "delete " + href);
    }
    return true;
}

std::vector<CatalogItem> CatalogClient::watch(const std::string& prefix, const std::string& since_iso,
                                              std::chrono::milliseconds timeout) const {
    net::ClientOptions opts;
    opts.read_timeout = timeout + std::chrono::seconds(5);
    net::HttpClient longpoll(http_.base_url(), opts);
    const auto r = longpoll.get("/cat/watch?prefix=" + url_encode(prefix) + "&since=" + url_encode(since_iso) +
                                "&timeout_ms=" + std::to_string(timeout.count()));
    if (!r.ok()) {
        raise_for(r, "watch " + prefix);
    }
    return items_from_json(r.json());
}

bool CatalogClient::healthy() const { return http_.get("/health").ok(); }

}// namespace echo::catalog
