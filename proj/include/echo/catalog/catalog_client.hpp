// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <echo/catalog/catalog.hpp>
#include <echo/net/http.hpp>

#include <optional>
#include <string>
#include <vector>

namespace echo::catalog {

/// Typed client of the catalog REST API. Transport failures raise
/// UnreachableError; catalog-side rejections raise the mapped echo error.
class CatalogClient {
  public:
    explicit CatalogClient(std::string base_url, net::ClientOptions options = {});

    void put(const CatalogItem& item) const;
    /// False when a live item already holds the href.
    bool put_if_absent(const CatalogItem& item) const;
    std::optional<CatalogItem> get(const std::string& href) const;
    std::vector<CatalogItem> query(const std::string& prefix) const;
    /// False when nothing was stored at the href.
    bool remove(const std::string& href) const;
    std::vector<CatalogItem> watch(const std::string& prefix, const std::string& since_iso,
                                   std::chrono::milliseconds timeout) const;
    bool healthy() const;

    const std::string& base_url() const noexcept { return http_.base_url(); }

  private:
    net::HttpClient http_;
};

/// Raises the echo exception matching a failed result.
[[noreturn]] void raise_for(const net::HttpResult& result, const std::string& what);

}// namespace echo::catalog
