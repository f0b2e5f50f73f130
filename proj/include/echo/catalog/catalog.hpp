// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <echo/common/time.hpp>

#include <chrono>
#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

namespace echo::catalog {

namespace rel {
inline constexpr std::string_view kLastUpdated = "urn:echo:rel:lastUpdated";
inline constexpr std::string_view kStale = "urn:echo:rel:stale";
inline constexpr std::string_view kExpires = "urn:echo:rel:expires";
inline constexpr std::string_view kState = "urn:echo:rel:state";
inline constexpr std::string_view kDescription = "urn:X-hypercat:rels:hasDescription:en";
inline constexpr std::string_view kClass = "urn:echo:rel:class";
inline constexpr std::string_view kCpuMillis = "urn:echo:rel:cpuMillis";
inline constexpr std::string_view kMemMb = "urn:echo:rel:memMb";
inline constexpr std::string_view kTags = "urn:echo:rel:tags";
inline constexpr std::string_view kVisibility = "urn:echo:rel:visibility";
inline constexpr std::string_view kReachableFrom = "urn:echo:rel:reachableFrom";
inline constexpr std::string_view kEndpoint = "urn:echo:rel:endpoint";
inline constexpr std::string_view kParent = "urn:echo:rel:parent";
inline constexpr std::string_view kProfile = "urn:echo:rel:profile";
inline constexpr std::string_view kStartedAt = "urn:echo:rel:startedAt";
inline constexpr std::string_view kStoppedAt = "urn:echo:rel:stoppedAt";
inline constexpr std::string_view kValue = "urn:echo:rel:value";
inline constexpr std::string_view kWarning = "urn:echo:rel:warning";
}// namespace rel

struct Relation {
    std::string rel;
    std::string val;

    bool operator==(const Relation&) const = default;
};

struct CatalogItem {
    std::string href;
    std::vector<Relation> metadata;

    /// First value of `rel`, if any.
    std::optional<std::string> value(std::string_view rel) const;
    std::string value_or(std::string_view rel, std::string fallback) const;
    std::vector<std::string> values(std::string_view rel) const;
    /// Replaces every relation named `rel` with a single one.
    CatalogItem& set(std::string_view rel, std::string val);
    CatalogItem& add(std::string_view rel, std::string val);
    CatalogItem& erase(std::string_view rel);

    bool operator==(const CatalogItem&) const = default;
};

/// Hrefs look like "/<kind>/<id>[/<sub>...]": non-empty, rooted, no whitespace,
/// no empty segment, kind ∈ {device, worker, dataflow, service}.
bool valid_href(std::string_view href);
/// Returns a description of why `href` is invalid, or empty.
std::string href_violation(std::string_view href);

/// First path segment ("device", "worker", ...).
std::string href_kind(std::string_view href);
/// Number of path segments.
std::size_t href_depth(std::string_view href);

/// The Resource Directory: an in-memory map from href to item.
///
/// Items are stored as immutable shared snapshots, so a reader always observes
/// either the old or the new complete item. Every write stamps a strictly
/// increasing lastUpdated relation.
class Catalog {
  public:
    enum class WriteResult { created, replaced };

    Catalog() = default;

    /// Full replacement (last writer wins). Throws ValidationError on a bad href
    /// or an empty rel name.
    WriteResult register_item(CatalogItem item);

    /// Writes only if no live item exists at the href. An item whose
    /// urn:echo:rel:expires lies in the past counts as absent.
    bool register_if_absent(CatalogItem item);

    std::optional<CatalogItem> get_item(std::string_view href) const;

    /// Items whose href starts with `prefix`, sorted by href.
    std::vector<CatalogItem> query_prefix(std::string_view prefix) const;

    /// False (not-found) when nothing was stored at the href.
    bool delete_item(std::string_view href);

    /// Items under `prefix` updated strictly after `since`. Blocks up to
    /// `timeout` while there are none.
    std::vector<CatalogItem> watch_prefix(std::string_view prefix, SysClock::time_point since,
                                          std::chrono::milliseconds timeout) const;

    /// Flags "/device/<id>" and "/worker/<id>" items not refreshed within
    /// `max_age` with urn:echo:rel:stale=true. The flag does not refresh
    /// lastUpdated. Returns the number of newly flagged items.
    std::size_t sweep_stale(SysClock::time_point now, std::chrono::milliseconds max_age);

    std::size_t size() const;

    /// Replaces the whole content, keeping each item's own lastUpdated.
    void load(std::vector<CatalogItem> items);

  private:
    struct Stored {
        CatalogItem item;
        SysClock::time_point updated;
    };

    SysClock::time_point next_stamp();
    std::vector<CatalogItem> collect_changed(std::string_view prefix, SysClock::time_point since) const;
    void notify_change();

    mutable std::shared_mutex mu_;
    std::map<std::string, std::shared_ptr<const Stored>, std::less<>> items_;
    SysClock::time_point last_stamp_{};

    mutable std::mutex change_mu_;
    mutable std::condition_variable change_cv_;
    std::uint64_t change_seq_ = 0;
};

}// namespace echo::catalog
