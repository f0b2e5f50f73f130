// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <echo/databatch/tuple.hpp>
#include <echo/engine/processor.hpp>

#include <json.hpp>

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace echo::wrappers {

/// A field reference: "n", "v", "u", "t", or "attr:<key>" for an attribute of
/// the batch the tuple came from.
using FieldValue = std::variant<double, std::string>;

std::optional<FieldValue> lookup(const data::EventTuple& t, const data::Attributes& attrs, const std::string& field);

enum class CmpOp { lt, le, gt, ge, eq, ne };

struct Predicate {
    std::string field;
    CmpOp op = CmpOp::eq;
    FieldValue constant;

    /// Empty when the field is missing or not comparable with the constant.
    std::optional<bool> eval(const data::EventTuple& t, const data::Attributes& attrs) const;
    static Predicate from_json(const nlohmann::json& doc);
};

/// One stage of a CEP pipeline. Stages are fed one tuple at a time and call
/// `next` for every tuple they pass on.
class CepStage {
  public:
    using Next = std::function<void(const data::EventTuple&)>;

    virtual ~CepStage() = default;
    /// Returns false when the tuple lacked a referenced field (an error).
    virtual bool process(const data::EventTuple& t, const data::Attributes& attrs, const Next& next) = 0;
    virtual void close(const Next& next) {}
};

/// An ordered pipeline of stages:
///   {"op":"filter","field":F,"cmp":"<|<=|>|>=|==|!=","value":C}
///   {"op":"scale","field":"v"|"t","factor":a,"offset":b[,"min":lo,"max":hi]}
///   {"op":"window_agg","n":N,"agg":"avg|min|max|count|sum","field":F}
///   {"op":"pattern_count","predicate":{...},"n":N,"k":K} or with "group_by":F
/// window_agg emits one tuple per full tumbling window named "<agg>(<field>)"
/// and discards a partial window at close. pattern_count emits a tuple named
/// "alert" (value = matches) when a window or group holds at least K matches.
class CepQuery {
  public:
    static CepQuery from_json(const nlohmann::json& stages);

    /// Feeds one tuple; returns false if some stage dropped it as an error.
    bool push(const data::EventTuple& t, const data::Attributes& attrs, const CepStage::Next& out);
    void close(const CepStage::Next& out);

    /// Convenience for tests: runs the whole sequence and closes.
    std::vector<data::EventTuple> run(const std::vector<data::EventTuple>& in, std::uint64_t* errors = nullptr);

  private:
    std::vector<std::shared_ptr<CepStage>> stages_;
};

/// Processor "cep": config {"stages":[...]}.
std::unique_ptr<engine::ProcessorLogic> make_cep(const flow::ProcessorSpec& spec, const engine::ProcessorContext& ctx);

}// namespace echo::wrappers
