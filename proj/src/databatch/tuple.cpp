// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#include <echo/common/error.hpp>
#include <echo/databatch/tuple.hpp>

#include <charconv>
#include <cmath>
#include <cstring>

namespace echo::data {

using Json = nlohmann::json;

bool EventTuple::operator==(const EventTuple& other) const {
    // Bitwise on the value so that -0.0 and 0.0 stay distinguishable.
    return name == other.name && unit == other.unit && timestamp == other.timestamp &&
           std::memcmp(&value, &other.value, sizeof value) == 0;
}

namespace {

void append_json_string(std::string_view s, std::string& out) {
    static constexpr char kHex[] = "0123456789abcdef";
    out.push_back('"');
    for (const char ch : s) {
        const auto c = static_cast<unsigned char>(ch);
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            case '\b': out += "\\b"; break;
            case '\f': out += "\\f"; break;
            default:
                if (c < 0x20) {
                    out += "\\u00";
                    out.push_back(kHex[c >> 4]);
                    out.push_back(kHex[c & 0xf]);
                } else {
                    out.push_back(ch);
                }
        }
    }
    out.push_back('"');
}

void append_double(double v, std::string& out) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    std::string_view text(buf, static_cast<std::size_t>(ptr - buf));
    out += text;
    // Keep the value a JSON float so that -0.0 survives decoding.
    if (text.find_first_of(".e") == std::string_view::npos) {
        out += ".0";
    }
}

}// namespace

void encode_tuple(const EventTuple& t, std::string& out) {
    if (t.timestamp < 0) {
        throw ValidationError("tuple timestamp must be >= 0");
    }
    if (!std::isfinite(t.value)) {
        throw ValidationError("tuple value must be finite");
    }
    out += "{\"n\":";
    append_json_string(t.name, out);
    out += ",\"v\":";
    append_double(t.value, out);
    out += ",\"u\":";
    append_json_string(t.unit, out);
    out += ",\"t\":";
    out += std::to_string(t.timestamp);
    out.push_back('}');
}

std::string encode_tuple(const EventTuple& t) {
    std::string out;
    encode_tuple(t, out);
    return out;
}

EventTuple decode_tuple(std::string_view line) {
    Json doc;
    try {
        doc = Json::parse(line);
    } catch (const Json::parse_error& e) {
        throw ParseError(std::string("tuple is not JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        throw ParseError("tuple must be a JSON object");
    }
    EventTuple t;
    const auto n = doc.find("n");
    const auto v = doc.find("v");
    if (n == doc.end() || !n->is_string() || v == doc.end() || !v->is_number()) {
        throw ParseError("tuple needs a string \"n\" and a numeric \"v\"");
    }
    t.name = n->get<std::string>();
    t.value = v->get<double>();
    if (const auto u = doc.find("u"); u != doc.end()) {
        if (!u->is_string()) {
            throw ParseError("tuple \"u\" must be a string");
        }
        t.unit = u->get<std::string>();
    }
    if (const auto ts = doc.find("t"); ts != doc.end()) {
        if (!ts->is_number()) {
            throw ParseError("tuple \"t\" must be a number");
        }
        t.timestamp = ts->is_number_float() ? static_cast<std::int64_t>(ts->get<double>()) : ts->get<std::int64_t>();
        if (t.timestamp < 0) {
            throw ParseError("tuple timestamp must be >= 0");
        }
    }
    return t;
}

WindowPolicy WindowPolicy::count(std::uint64_t n, bool flush_on_close) {
    WindowPolicy p;
    p.mode = Mode::count;
    p.count_n = n;
    p.flush_on_close = flush_on_close;
    return p;
}

WindowPolicy WindowPolicy::time(std::int64_t ms, bool flush_on_close) {
    WindowPolicy p;
    p.mode = Mode::time;
    p.duration_ms = ms;
    p.flush_on_close = flush_on_close;
    return p;
}

WindowPolicy WindowPolicy::from_json(const Json& doc) {
    WindowPolicy p;
    if (doc.is_null()) {
        return p;
    }
    if (!doc.is_object()) {
        throw ValidationError("window must be an object");
    }
    const auto mode = doc.value("mode", std::string("count"));
    if (mode == "count") {
        const auto n = doc.value("n", std::int64_t{50});
        if (n < 1) {
            throw ValidationError("count window needs n >= 1");
        }
        p = count(static_cast<std::uint64_t>(n));
    } else if (mode == "time") {
        p = time(doc.value("ms", std::int64_t{0}));
    } else {
        throw ValidationError("window mode must be count or time");
    }
    p.flush_on_close = doc.value("flush_on_close", true);
    p.validate();
    return p;
}

void WindowPolicy::validate() const {
    if (mode == Mode::count && count_n < 1) {
        throw ValidationError("count window needs n >= 1");
    }
    if (mode == Mode::time && duration_ms < 1) {
        throw ValidationError("time window needs ms >= 1");
    }
}

StreamBatcher::StreamBatcher(WindowPolicy policy, Attributes extra) : policy_(policy), extra_(std::move(extra)) {
    policy_.validate();
}

std::optional<DataBatch> StreamBatcher::emit() {
    if (pending_ == 0) {
        return std::nullopt;
    }
    auto batch = DataBatch::make(std::move(buffer_), pending_, extra_);
    buffer_.clear();
    pending_ = 0;
    return batch;
}

std::optional<DataBatch> StreamBatcher::push(const EventTuple& t, Clock::time_point now) {
    std::optional<DataBatch> expired;
    if (policy_.mode == WindowPolicy::Mode::time) {
        expired = tick(now);
    }
    if (pending_ == 0) {
        opened_ = now;
    }
    encode_tuple(t, buffer_);
    buffer_.push_back('\n');
    ++pending_;
    if (policy_.mode == WindowPolicy::Mode::count && pending_ >= policy_.count_n) {
        return emit();
    }
    return expired;
}

std::optional<DataBatch> StreamBatcher::tick(Clock::time_point now) {
    if (policy_.mode != WindowPolicy::Mode::time || pending_ == 0) {
        return std::nullopt;
    }
    if (now - opened_ >= std::chrono::milliseconds(policy_.duration_ms)) {
        return emit();
    }
    return std::nullopt;
}

std::optional<DataBatch> StreamBatcher::close() {
    if (!policy_.flush_on_close) {
        buffer_.clear();
        pending_ = 0;
        return std::nullopt;
    }
    return emit();
}

std::optional<DataBatch> StreamBatcher::flush() { return emit(); }

std::vector<DataBatch> stream_to_batch(const std::vector<EventTuple>& events, const WindowPolicy& policy) {
    StreamBatcher batcher(policy);
    std::vector<DataBatch> out;
    for (const auto& e : events) {
        if (auto b = batcher.push(e)) {
            out.push_back(std::move(*b));
        }
        if (auto b = batcher.tick()) {
            out.push_back(std::move(*b));
        }
    }
    if (auto b = batcher.close()) {
        out.push_back(std::move(*b));
    }
    return out;
}

std::vector<EventTuple> batch_to_stream(const DataBatch& batch) {
    const auto& content = batch.content();
    if (batch.opaque()) {
        if (content.empty()) {
            return {};
        }
        throw ParseError("batch " + batch.id() + " carries opaque content (batch.count=0), not tuples");
    }
    std::vector<EventTuple> out;
    out.reserve(batch.count());
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < content.size()) {
        auto end = content.find('\n', pos);
        if (end == std::string::npos) {
            end = content.size();
        }
        ++line_no;
        std::string_view line(content.data() + pos, end - pos);
        pos = end + 1;
        if (line.empty()) {
            continue;
        }
        try {
            out.push_back(decode_tuple(line));
        } catch (const ParseError& e) {
            throw ParseError("batch " + batch.id() + " line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (out.size() != batch.count()) {
        throw IntegrityError("batch " + batch.id() + " declares batch.count=" + std::to_string(batch.count()) + " but holds " +
                             std::to_string(out.size()) + " tuples");
    }
    return out;
}

std::uint64_t count_lines(std::string_view content) {
    std::uint64_t n = 0;
    std::size_t pos = 0;
    while (pos < content.size()) {
        auto end = content.find('\n', pos);
        if (end == std::string_view::npos) {
            end = content.size();
        }
        if (end > pos) {
            ++n;
        }
        pos = end + 1;
    }
    return n;
}

}// namespace echo::data
