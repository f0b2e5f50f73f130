// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#include <echo/catalog/catalog.hpp>
#include <echo/common/error.hpp>

#include <algorithm>
#include <cctype>

namespace echo::catalog {

std::optional<std::string> CatalogItem::value(std::string_view rel) const {
    for (const auto& r : metadata) {
        if (r.rel == rel) {
            return r.val;
        }
    }
    return std::nullopt;
}

std::string CatalogItem::value_or(std::string_view rel, std::string fallback) const {
    auto v = value(rel);
    return v ? *v : std::move(fallback);
}

std::vector<std::string> CatalogItem::values(std::string_view rel) const {
    std::vector<std::string> out;
    for (const auto& r : metadata) {
        if (r.rel == rel) {
            out.push_back(r.val);
        }
    }
    return out;
}

CatalogItem& CatalogItem::set(std::string_view rel, std::string val) {
    erase(rel);
    metadata.push_back({std::string(rel), std::move(val)});
    return *this;
}

CatalogItem& CatalogItem::add(std::string_view rel, std::string val) {
    metadata.push_back({std::string(rel), std::move(val)});
    return *this;
}

CatalogItem& CatalogItem::erase(std::string_view rel) {
    std::erase_if(metadata, [&](const Relation& r) { return r.rel == rel; });
    return *this;
}

std::string href_violation(std::string_view href) {
    if (href.empty()) {
        return "href is empty";
    }
    if (href.front() != '/') {
        return "href '" + std::string(href) + "' must begin with '/'";
    }
    for (const char c : href) {
        if (std::isspace(static_cast<unsigned char>(c)) || std::iscntrl(static_cast<unsigned char>(c))) {
            return "href '" + std::string(href) + "' contains whitespace";
        }
    }
    std::vector<std::string_view> segments;
    std::size_t pos = 1;
    while (pos <= href.size()) {
        const auto next = href.find('/', pos);
        const auto end = next == std::string_view::npos ? href.size() : next;
        segments.push_back(href.substr(pos, end - pos));
        if (next == std::string_view::npos) {
            break;
        }
        pos = next + 1;
    }
    if (std::any_of(segments.begin(), segments.end(), [](auto s) { return s.empty(); })) {
        return "href '" + std::string(href) + "' has an empty path segment";
    }
    static constexpr std::string_view kKinds[] = {"device", "worker", "dataflow", "service"};
    if (std::find(std::begin(kKinds), std::end(kKinds), segments.front()) == std::end(kKinds)) {
        return "href '" + std::string(href) + "' has unknown kind '" + std::string(segments.front()) + "'";
    }
    if (segments.size() < 2) {
        return "href '" + std::string(href) + "' lacks an item id";
    }
    return {};
}

bool valid_href(std::string_view href) { return href_violation(href).empty(); }

std::string href_kind(std::string_view href) {
    if (href.size() < 2 || href.front() != '/') {
        return {};
    }
    const auto next = href.find('/', 1);
    return std::string(href.substr(1, next == std::string_view::npos ? std::string_view::npos : next - 1));
}

std::size_t href_depth(std::string_view href) {
    return static_cast<std::size_t>(std::count(href.begin(), href.end(), '/'));
}

namespace {

void validate_item(const CatalogItem& item) {
    std::vector<std::string> violations;
    if (auto v = href_violation(item.href); !v.empty()) {
        violations.push_back(std::move(v));
    }
    for (const auto& r : item.metadata) {
        if (r.rel.empty()) {
            violations.push_back("relation with empty rel on " + item.href);
            break;
        }
    }
    if (!violations.empty()) {
        throw ValidationError(std::move(violations));
    }
}

bool expired(const CatalogItem& item, SysClock::time_point now) {
    const auto exp = item.value(rel::kExpires);
    if (!exp) {
        return false;
    }
    const auto tp = parse_iso8601(*exp);
    return tp && *tp <= now;
}

}// namespace

SysClock::time_point Catalog::next_stamp() {
    SysClock::time_point now = std::chrono::time_point_cast<Micros>(SysClock::now());
    if (now <= last_stamp_) {
        now = last_stamp_ + Micros(1);
    }
    last_stamp_ = now;
    return now;
}

void Catalog::notify_change() {
    {
        std::lock_guard lock(change_mu_);
        ++change_seq_;
    }
    change_cv_.notify_all();
}

Catalog::WriteResult Catalog::register_item(CatalogItem item) {
    validate_item(item);
    WriteResult result;
    {
        std::unique_lock lock(mu_);
        const auto stamp = next_stamp();
        item.set(rel::kLastUpdated, iso8601_utc(stamp));
        auto stored = std::make_shared<const Stored>(Stored{std::move(item), stamp});
        auto [it, inserted] = items_.try_emplace(stored->item.href, stored);
        if (!inserted) {
            it->second = std::move(stored);
        }
        result = inserted ? WriteResult::created : WriteResult::replaced;
    }
    notify_change();
    return result;
}

bool Catalog::register_if_absent(CatalogItem item) {
    validate_item(item);
    {
        std::unique_lock lock(mu_);
        const auto it = items_.find(item.href);
        if (it != items_.end() && !expired(it->second->item, SysClock::now())) {
            return false;
        }
        const auto stamp = next_stamp();
        item.set(rel::kLastUpdated, iso8601_utc(stamp));
        auto stored = std::make_shared<const Stored>(Stored{std::move(item), stamp});
        items_.insert_or_assign(stored->item.href, std::move(stored));
    }
    notify_change();
    return true;
}

std::optional<CatalogItem> Catalog::get_item(std::string_view href) const {
    std::shared_ptr<const Stored> stored;
    {
        std::shared_lock lock(mu_);
        const auto it = items_.find(href);
        if (it == items_.end()) {
            return std::nullopt;
        }
        stored = it->second;
    }
    return stored->item;
}

std::vector<CatalogItem> Catalog::query_prefix(std::string_view prefix) const {
    std::vector<std::shared_ptr<const Stored>> hits;
    {
        std::shared_lock lock(mu_);
        for (auto it = items_.lower_bound(prefix); it != items_.end() && it->first.starts_with(prefix); ++it) {
            hits.push_back(it->second);
        }
    }
    std::vector<CatalogItem> out;
    out.reserve(hits.size());
    for (const auto& h : hits) {
        out.push_back(h->item);
    }
    return out;
}

bool Catalog::delete_item(std::string_view href) {
    bool erased = false;
    {
        std::unique_lock lock(mu_);
        const auto it = items_.find(href);
        if (it != items_.end()) {
            items_.erase(it);
            erased = true;
        }
    }
    if (erased) {
        notify_change();
    }
    return erased;
}

std::vector<CatalogItem> Catalog::collect_changed(std::string_view prefix, SysClock::time_point since) const {
    std::vector<CatalogItem> out;
    std::shared_lock lock(mu_);
    for (auto it = items_.lower_bound(prefix); it != items_.end() && it->first.starts_with(prefix); ++it) {
        if (it->second->updated > since) {
            out.push_back(it->second->item);
        }
    }
    return out;
}

std::vector<CatalogItem> Catalog::watch_prefix(std::string_view prefix, SysClock::time_point since,
                                               std::chrono::milliseconds timeout) const {
    const auto deadline = SteadyClock::now() + timeout;
    while (true) {
        std::uint64_t seen;
        {
            std::lock_guard lock(change_mu_);
            seen = change_seq_;
        }
        auto changed = collect_changed(prefix, since);
        if (!changed.empty()) {
            return changed;
        }
        std::unique_lock lock(change_mu_);
        if (!change_cv_.wait_until(lock, deadline, [&] { return change_seq_ != seen; })) {
            return {};
        }
    }
}

std::size_t Catalog::sweep_stale(SysClock::time_point now, std::chrono::milliseconds max_age) {
    std::size_t flagged = 0;
    std::unique_lock lock(mu_);
    for (auto& [href, stored] : items_) {
        if (href_depth(href) != 2) {
            continue;
        }
        const auto kind = href_kind(href);
        if (kind != "device" && kind != "worker") {
            continue;
        }
        if (now - stored->updated <= max_age || stored->item.value(rel::kStale) == "true") {
            continue;
        }
        Stored copy = *stored;
        copy.item.set(rel::kStale, "true");
        stored = std::make_shared<const Stored>(std::move(copy));
        ++flagged;
    }
    return flagged;
}

std::size_t Catalog::size() const {
    std::shared_lock lock(mu_);
    return items_.size();
}

void Catalog::load(std::vector<CatalogItem> items) {
    std::unique_lock lock(mu_);
    items_.clear();
    for (auto& item : items) {
        validate_item(item);
        SysClock::time_point updated = SysClock::now();
        if (auto lu = item.value(rel::kLastUpdated)) {
            if (auto tp = parse_iso8601(*lu)) {
                updated = *tp;
            }
        } else {
            item.set(rel::kLastUpdated, iso8601_utc(updated));
        }
        last_stamp_ = std::max<SysClock::time_point>(last_stamp_, std::chrono::time_point_cast<Micros>(updated));
        auto href = item.href;
        items_.insert_or_assign(std::move(href), std::make_shared<const Stored>(Stored{std::move(item), updated}));
    }
}

}// namespace echo::catalog
