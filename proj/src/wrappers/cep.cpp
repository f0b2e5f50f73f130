// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#include <echo/common/error.hpp>
#include <echo/wrappers/cep.hpp>

#include <charconv>
#include <cmath>
#include <limits>

namespace echo::wrappers {

using data::Attributes;
using data::EventTuple;
using Json = nlohmann::json;

namespace {

std::optional<double> as_number(const FieldValue& v) {
    if (const auto* d = std::get_if<double>(&v)) {
        return *d;
    }
    const auto& s = std::get<std::string>(v);
    double out = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        return std::nullopt;
    }
    return out;
}

CmpOp parse_op(const std::string& op) {
    if (op == "<") return CmpOp::lt;
    if (op == "<=") return CmpOp::le;
    if (op == ">") return CmpOp::gt;
    if (op == ">=") return CmpOp::ge;
    if (op == "==") return CmpOp::eq;
    if (op == "!=") return CmpOp::ne;
    throw ValidationError("unknown comparison '" + op + "'");
}

template<typename T>
bool compare(const T& a, CmpOp op, const T& b) {
    switch (op) {
        case CmpOp::lt: return a < b;
        case CmpOp::le: return a <= b;
        case CmpOp::gt: return a > b;
        case CmpOp::ge: return a >= b;
        case CmpOp::eq: return a == b;
        case CmpOp::ne: return a != b;
    }
    return false;
}

std::string require_field(const Json& doc, const char* key) {
    const auto f = doc.value(key, std::string());
    if (f.empty()) {
        throw ValidationError(std::string("CEP stage needs a non-empty \"") + key + "\"");
    }
    return f;
}

class FilterStage final : public CepStage {
  public:
    explicit FilterStage(Predicate p) : pred_(std::move(p)) {}
    bool process(const EventTuple& t, const Attributes& attrs, const Next& next) override {
        const auto r = pred_.eval(t, attrs);
        if (!r) {
            return false;
        }
        if (*r) {
            next(t);
        }
        return true;
    }

  private:
    Predicate pred_;
};

class ScaleStage final : public CepStage {
  public:
    ScaleStage(std::string field, double factor, double offset, double lo, double hi)
        : field_(std::move(field)), factor_(factor), offset_(offset), lo_(lo), hi_(hi) {}
    bool process(const EventTuple& t, const Attributes&, const Next& next) override {
        EventTuple out = t;
        if (field_ == "v") {
            out.value = std::clamp(t.value * factor_ + offset_, lo_, hi_);
        } else {
            out.timestamp = static_cast<std::int64_t>(std::clamp(static_cast<double>(t.timestamp) * factor_ + offset_, lo_, hi_));
        }
        next(out);
        return true;
    }

  private:
    std::string field_;
    double factor_, offset_, lo_, hi_;
};

class WindowAggStage final : public CepStage {
  public:
    WindowAggStage(std::uint64_t n, std::string agg, std::string field) : n_(n), agg_(std::move(agg)), field_(std::move(field)) {}
    bool process(const EventTuple& t, const Attributes& attrs, const Next& next) override {
        std::optional<double> x;
        if (agg_ == "count") {
            x = 1.0;
        } else if (const auto v = lookup(t, attrs, field_)) {
            x = as_number(*v);
        }
        if (!x) {
            return false;
        }
        if (count_ == 0) {
            min_ = max_ = *x;
            sum_ = 0;
        }
        ++count_;
        sum_ += *x;
        min_ = std::min(min_, *x);
        max_ = std::max(max_, *x);
        last_ = t;
        if (count_ == n_) {
            double r = 0;
            if (agg_ == "avg") r = sum_ / static_cast<double>(count_);
            else if (agg_ == "sum") r = sum_;
            else if (agg_ == "min") r = min_;
            else if (agg_ == "max") r = max_;
            else r = static_cast<double>(count_);
            next(EventTuple{agg_ + "(" + field_ + ")", r, last_.unit, last_.timestamp});
            count_ = 0;
        }
        return true;
    }

  private:
    std::uint64_t n_;
    std::string agg_, field_;
    std::uint64_t count_ = 0;
    double sum_ = 0, min_ = 0, max_ = 0;
    EventTuple last_;
};

class PatternCountStage final : public CepStage {
  public:
    PatternCountStage(Predicate p, std::uint64_t n, std::uint64_t k, std::string group_by)
        : pred_(std::move(p)), n_(n), k_(k), group_by_(std::move(group_by)) {}

    bool process(const EventTuple& t, const Attributes& attrs, const Next& next) override {
        const auto r = pred_.eval(t, attrs);
        if (!r) {
            return false;
        }
        if (!group_by_.empty()) {
            const auto g = lookup(t, attrs, group_by_);
            if (!g) {
                return false;
            }
            if (seen_ > 0 && *g != group_) {
                evaluate(next);
            }
            group_ = *g;
        }
        ++seen_;
        matches_ += *r ? 1 : 0;
        last_ = t;
        if (group_by_.empty() && seen_ == n_) {
            evaluate(next);
        }
        return true;
    }

    void close(const Next& next) override {
        if (!group_by_.empty() && seen_ > 0) {
            evaluate(next);
        }
    }

  private:
    void evaluate(const Next& next) {
        if (matches_ >= k_) {
            next(EventTuple{"alert", static_cast<double>(matches_), "count", last_.timestamp});
        }
        seen_ = 0;
        matches_ = 0;
    }

    Predicate pred_;
    std::uint64_t n_, k_;
    std::string group_by_;
    FieldValue group_;
    std::uint64_t seen_ = 0;
    std::uint64_t matches_ = 0;
    EventTuple last_;
};

std::shared_ptr<CepStage> make_stage(const Json& doc) {
    if (!doc.is_object()) {
        throw ValidationError("CEP stage must be an object");
    }
    const auto op = doc.value("op", std::string());
    if (op == "filter") {
        return std::make_shared<FilterStage>(Predicate::from_json(doc));
    }
    if (op == "scale") {
        const auto field = doc.value("field", std::string("v"));
        if (field != "v" && field != "t") {
            throw ValidationError("scale applies to v or t, not " + field);
        }
        return std::make_shared<ScaleStage>(field, doc.value("factor", 1.0), doc.value("offset", 0.0),
                                            doc.value("min", -std::numeric_limits<double>::infinity()),
                                            doc.value("max", std::numeric_limits<double>::infinity()));
    }
    if (op == "window_agg") {
        const auto n = doc.value("n", std::int64_t{0});
        if (n < 1) {
            throw ValidationError("window_agg needs n >= 1");
        }
        const auto agg = doc.value("agg", std::string("avg"));
        if (agg != "avg" && agg != "min" && agg != "max" && agg != "count" && agg != "sum") {
            throw ValidationError("unknown aggregate " + agg);
        }
        return std::make_shared<WindowAggStage>(static_cast<std::uint64_t>(n), agg, doc.value("field", std::string("v")));
    }
    if (op == "pattern_count") {
        if (!doc.contains("predicate")) {
            throw ValidationError("pattern_count needs a predicate");
        }
        const auto group_by = doc.value("group_by", std::string());
        const auto n = doc.value("n", std::int64_t{0});
        const auto k = doc.value("k", std::int64_t{1});
        if (group_by.empty() && n < 1) {
            throw ValidationError("pattern_count needs n >= 1 or a group_by field");
        }
        if (k < 1) {
            throw ValidationError("pattern_count needs k >= 1");
        }
        return std::make_shared<PatternCountStage>(Predicate::from_json(doc["predicate"]), static_cast<std::uint64_t>(n),
                                                   static_cast<std::uint64_t>(k), group_by);
    }
    throw ValidationError("unknown CEP stage '" + op + "'");
}

}// namespace

std::optional<FieldValue> lookup(const EventTuple& t, const Attributes& attrs, const std::string& field) {
    if (field == "v") return t.value;
    if (field == "t") return static_cast<double>(t.timestamp);
    if (field == "n") return t.name;
    if (field == "u") return t.unit;
    if (field.rfind("attr:", 0) == 0) {
        const auto it = attrs.find(std::string_view(field).substr(5));
        if (it != attrs.end()) {
            return it->second;
        }
    }
    return std::nullopt;
}

std::optional<bool> Predicate::eval(const EventTuple& t, const Attributes& attrs) const {
    const auto v = lookup(t, attrs, field);
    if (!v) {
        return std::nullopt;
    }
    if (const auto* c = std::get_if<double>(&constant)) {
        const auto x = as_number(*v);
        if (!x) {
            return std::nullopt;
        }
        return compare(*x, op, *c);
    }
    const auto* s = std::get_if<std::string>(&*v);
    const std::string text = s ? *s : Json(std::get<double>(*v)).dump();
    return compare(text, op, std::get<std::string>(constant));
}

Predicate Predicate::from_json(const Json& doc) {
    Predicate p;
    p.field = require_field(doc, "field");
    p.op = parse_op(doc.value("cmp", std::string("==")));
    if (!doc.contains("value")) {
        throw ValidationError("predicate on " + p.field + " needs a value");
    }
    const auto& v = doc["value"];
    if (v.is_number()) {
        p.constant = v.get<double>();
    } else if (v.is_string()) {
        p.constant = v.get<std::string>();
    } else {
        throw ValidationError("predicate value must be a number or string");
    }
    return p;
}

CepQuery CepQuery::from_json(const Json& stages) {
    if (!stages.is_array() || stages.empty()) {
        throw ValidationError("CEP query needs a non-empty stages array");
    }
    CepQuery q;
    for (const auto& s : stages) {
        q.stages_.push_back(make_stage(s));
    }
    return q;
}

bool CepQuery::push(const EventTuple& t, const Attributes& attrs, const CepStage::Next& out) {
    // Chain stage i into stage i+1; the first failing stage stops the tuple.
    bool ok = true;
    std::function<void(std::size_t, const EventTuple&)> feed = [&](std::size_t i, const EventTuple& x) {
        if (i == stages_.size()) {
            out(x);
            return;
        }
        if (!stages_[i]->process(x, attrs, [&, i](const EventTuple& y) { feed(i + 1, y); })) {
            ok = false;
        }
    };
    feed(0, t);
    return ok;
}

void CepQuery::close(const CepStage::Next& out) {
    static const Attributes kNone;
    for (std::size_t i = 0; i < stages_.size(); ++i) {
        stages_[i]->close([&, i](const EventTuple& y) {
            std::function<void(std::size_t, const EventTuple&)> feed = [&](std::size_t j, const EventTuple& x) {
                if (j == stages_.size()) {
                    out(x);
                    return;
                }
                stages_[j]->process(x, kNone, [&, j](const EventTuple& z) { feed(j + 1, z); });
            };
            feed(i + 1, y);
        });
    }
}

std::vector<EventTuple> CepQuery::run(const std::vector<EventTuple>& in, std::uint64_t* errors) {
    std::vector<EventTuple> out;
    const Attributes none;
    const auto sink = [&](const EventTuple& t) { out.push_back(t); };
    for (const auto& t : in) {
        if (!push(t, none, sink) && errors) {
            ++*errors;
        }
    }
    close(sink);
    return out;
}

namespace {

class CepLogic final : public engine::ProcessorLogic {
  public:
    explicit CepLogic(CepQuery q) : query_(std::move(q)) {}

    void on_tuple(const EventTuple& t, engine::Emitter& out) override {
        if (!query_.push(t, out.input_attributes(), [&](const EventTuple& x) { out.emit_tuple(x); })) {
            out.count_error("tuple " + t.name + " lacks a field referenced by the query");
        }
    }

    void on_close(engine::Emitter& out) override {
        query_.close([&](const EventTuple& x) { out.emit_tuple(x); });
    }

  private:
    CepQuery query_;
};

}// namespace

std::unique_ptr<engine::ProcessorLogic> make_cep(const flow::ProcessorSpec& spec, const engine::ProcessorContext&) {
    return std::make_unique<CepLogic>(CepQuery::from_json(spec.config.value("stages", Json::array())));
}

}// namespace echo::wrappers
