// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#include <echo/common/error.hpp>
#include <echo/wrappers/bridge.hpp>
#include <echo/wrappers/builtins.hpp>
#include <echo/wrappers/cep.hpp>
#include <echo/wrappers/exec.hpp>

#include <cmath>
#include <fstream>
#include <thread>

namespace echo::wrappers {

using data::DataBatch;
using data::EventTuple;
using engine::Emitter;
using Json = nlohmann::json;
using Clock = std::chrono::steady_clock;

std::vector<EventTuple> parse_senml_record(std::string_view line) {
    Json doc;
    try {
        doc = Json::parse(line);
    } catch (const Json::exception& e) {
        throw ParseError(std::string("senml: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("e") || !doc["e"].is_array()) {
        throw ParseError("senml: record needs an \"e\" array");
    }
    const auto base_name = doc.value("bn", std::string());
    const auto base_unit = doc.value("bu", std::string());
    const double base_time = doc.value("bt", 0.0);
    std::vector<EventTuple> out;
    for (const auto& e : doc["e"]) {
        if (!e.is_object() || !e.contains("v") || !e["v"].is_number()) {
            throw ParseError("senml: entry without numeric \"v\"");
        }
        EventTuple t;
        t.name = base_name + e.value("n", std::string());
        t.unit = e.value("u", base_unit);
        t.value = e["v"].get<double>();
        const double ts = base_time + e.value("t", 0.0);
        if (!std::isfinite(t.value) || !(ts >= 0)) {
            throw ParseError("senml: bad value or negative time");
        }
        t.timestamp = static_cast<std::int64_t>(ts);
        out.push_back(std::move(t));
    }
    return out;
}

namespace {

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot read " + path.string());
    }
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (!line.empty()) {
            lines.push_back(std::move(line));
        }
    }
    return lines;
}

/// Replays a SenML file at a fixed record rate. Mode "tuples" emits parsed
/// tuples through the output window; mode "raw" emits opaque batches of
/// `window.n` record lines for a downstream parse_senml.
class SourceReplay final : public engine::ProcessorLogic {
  public:
    SourceReplay(const flow::ProcessorSpec& spec) {
        const auto& cfg = spec.config;
        const auto file = cfg.value("file", std::string());
        if (file.empty()) {
            throw ValidationError("source_replay needs \"file\"");
        }
        lines_ = read_lines(file);
        if (lines_.empty()) {
            throw ValidationError("source_replay: " + file + " has no records");
        }
        rate_ = cfg.value("rate", 0.0);
        loop_ = cfg.value("loop", false);
        limit_ = cfg.value("limit", std::uint64_t{0});
        max_ms_ = cfg.value("max_ms", std::int64_t{0});
        const auto mode = cfg.value("mode", std::string("tuples"));
        if (mode != "tuples" && mode != "raw") {
            throw ValidationError("source_replay mode must be tuples or raw");
        }
        raw_ = mode == "raw";
        raw_n_ = data::WindowPolicy::from_json(cfg.contains("window") ? cfg["window"] : Json()).count_n;
        if (rate_ < 0) {
            throw ValidationError("source_replay rate must be >= 0");
        }
    }

    bool is_source() const override { return true; }

    bool poll(Emitter& out) override {
        const auto now = Clock::now();
        if (!started_) {
            started_ = true;
            t0_ = now;
            base_ = now;
        }
        if (max_ms_ > 0 && now - t0_ >= std::chrono::milliseconds(max_ms_)) {
            flush_raw(out);
            return false;
        }
        std::uint64_t due = 256;
        if (rate_ > 0) {
            const double elapsed = std::chrono::duration<double>(now - base_).count();
            auto target = static_cast<std::uint64_t>(elapsed * rate_);
            // Do not burst to catch up after a long pause.
            const auto slack = static_cast<std::uint64_t>(std::max(1.0, rate_ * 0.25));
            if (target > paced_ + slack) {
                base_ = now - std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(paced_ / rate_));
                target = paced_;
            }
            due = std::min<std::uint64_t>(target - std::min(target, paced_), 256);
        }
        for (std::uint64_t i = 0; i < due; ++i) {
            if (limit_ > 0 && emitted_ >= limit_) {
                flush_raw(out);
                return false;
            }
            if (next_ >= lines_.size()) {
                if (!loop_) {
                    flush_raw(out);
                    return false;
                }
                next_ = 0;
            }
            emit_record(lines_[next_++], out);
            ++paced_;
        }
        if (due == 0 || rate_ > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(rate_ > 0 ? std::clamp<int>(static_cast<int>(1000 / rate_), 1, 20) : 1));
        }
        return true;
    }

    void on_tick(Emitter& out) override {
        // Keep raw batches flowing at low rates.
        if (raw_ && !raw_buf_.empty() && Clock::now() - raw_opened_ > std::chrono::seconds(1)) {
            flush_raw(out);
        }
    }

    Json stats() const override { return {{"records_emitted", emitted_.load()}, {"records_total", lines_.size()}}; }

  private:
    void emit_record(const std::string& line, Emitter& out) {
        ++emitted_;
        if (raw_) {
            if (raw_buf_.empty()) {
                raw_opened_ = Clock::now();
            }
            raw_buf_ += line;
            raw_buf_ += '\n';
            if (++raw_lines_ >= raw_n_) {
                flush_raw(out);
            }
            return;
        }
        try {
            for (const auto& t : parse_senml_record(line)) {
                out.emit_tuple(t);
            }
        } catch (const ParseError& e) {
            out.count_error(e.what());
        }
    }

    void flush_raw(Emitter& out) {
        if (raw_buf_.empty()) {
            return;
        }
        out.emit_batch(DataBatch::make(std::move(raw_buf_), 0, {{"senml.records", std::to_string(raw_lines_)}}));
        raw_buf_.clear();
        raw_lines_ = 0;
    }

    std::vector<std::string> lines_;
    double rate_ = 0;
    bool loop_ = false;
    std::uint64_t limit_ = 0;
    std::int64_t max_ms_ = 0;
    bool raw_ = false;
    std::uint64_t raw_n_ = 50;

    bool started_ = false;
    Clock::time_point t0_;
    Clock::time_point base_;
    std::uint64_t paced_ = 0;
    std::size_t next_ = 0;
    std::atomic<std::uint64_t> emitted_{0};
    std::string raw_buf_;
    std::uint64_t raw_lines_ = 0;
    Clock::time_point raw_opened_;
};

/// Opaque SenML lines in, tuples out. Malformed records are skipped.
class ParseSenml final : public engine::ProcessorLogic {
  public:
    void on_batch(const DataBatch& batch, Emitter& out) override {
        const auto& content = batch.content();
        std::size_t pos = 0;
        while (pos < content.size()) {
            auto end = content.find('\n', pos);
            if (end == std::string::npos) {
                end = content.size();
            }
            const std::string_view line(content.data() + pos, end - pos);
            pos = end + 1;
            if (line.empty()) {
                continue;
            }
            try {
                for (const auto& t : parse_senml_record(line)) {
                    out.emit_tuple(t);
                }
                ++records_;
            } catch (const ParseError& e) {
                ++skipped_;
                out.count_error(e.what());
            }
        }
    }

    Json stats() const override { return {{"records", records_.load()}, {"skipped", skipped_.load()}}; }

  private:
    std::atomic<std::uint64_t> records_{0};
    std::atomic<std::uint64_t> skipped_{0};
};

class Annotate final : public engine::ProcessorLogic {
  public:
    explicit Annotate(const flow::ProcessorSpec& spec) {
        if (spec.input_model == flow::DataModel::stream) {
            throw ValidationError("annotate works on batches; use input_model microbatch or file");
        }
        const auto& cfg = spec.config;
        if (cfg.contains("attributes")) {
            for (const auto& [k, v] : cfg["attributes"].items()) {
                attrs_[k] = v.is_string() ? v.get<std::string>() : v.dump();
            }
        }
        if (cfg.contains("key")) {
            attrs_[cfg["key"].get<std::string>()] = cfg.value("val", std::string());
        }
        if (attrs_.empty()) {
            throw ValidationError("annotate needs key/val or attributes");
        }
        for (const auto& [k, v] : attrs_) {
            if (k.rfind("batch.", 0) == 0) {
                throw ValidationError("annotate may not set " + k);
            }
        }
    }

    void on_batch(const DataBatch& batch, Emitter& out) override { out.emit_batch(batch.with_attributes(attrs_)); }

  private:
    data::Attributes attrs_;
};

class Identity final : public engine::ProcessorLogic {
  public:
    void on_tuple(const EventTuple& t, Emitter& out) override { out.emit_tuple(t); }
    void on_batch(const DataBatch& batch, Emitter& out) override { out.emit_batch(batch); }
};

/// Appends batch content to a file, one tuple (or opaque line) per line.
class SinkFile final : public engine::ProcessorLogic {
  public:
    explicit SinkFile(const flow::ProcessorSpec& spec) {
        path_ = spec.config.value("path", std::string());
        if (path_.empty()) {
            throw ValidationError("sink_file needs \"path\"");
        }
        if (path_.has_parent_path()) {
            std::filesystem::create_directories(path_.parent_path());
        }
        file_.open(path_, std::ios::app | std::ios::binary);
        if (!file_) {
            throw ValidationError("sink_file cannot open " + path_.string());
        }
    }

    void on_batch(const DataBatch& batch, Emitter&) override {
        const auto& content = batch.content();
        file_ << content;
        if (!content.empty() && content.back() != '\n') {
            file_ << '\n';
        }
        file_.flush();
        if (!file_) {
            throw IoError("sink_file write failed: " + path_.string());
        }
        ++batches_;
        tuples_ += batch.count();
    }

    Json stats() const override { return {{"batches", batches_.load()}, {"tuples", tuples_.load()}, {"path", path_.string()}}; }

  private:
    std::filesystem::path path_;
    std::ofstream file_;
    std::atomic<std::uint64_t> batches_{0};
    std::atomic<std::uint64_t> tuples_{0};
};

class SinkCount final : public engine::ProcessorLogic {
  public:
    void on_batch(const DataBatch& batch, Emitter&) override {
        ++batches_;
        tuples_ += batch.count();
    }

    Json stats() const override { return {{"batches", batches_.load()}, {"tuples", tuples_.load()}}; }

  private:
    std::atomic<std::uint64_t> batches_{0};
    std::atomic<std::uint64_t> tuples_{0};
};

template <typename T>
engine::LogicFactory plain() {
    return [](const flow::ProcessorSpec&, const engine::ProcessorContext&) { return std::make_unique<T>(); };
}

template <typename T>
engine::LogicFactory with_spec() {
    return [](const flow::ProcessorSpec& spec, const engine::ProcessorContext&) { return std::make_unique<T>(spec); };
}

}// namespace

void register_all(engine::ProcessorRegistry& registry) {
    registry.add("cep", make_cep);
    registry.add("exec", make_exec);
    registry.add("bridge", make_bridge);
    registry.add("builtin:source_replay", with_spec<SourceReplay>());
    registry.add("builtin:parse_senml", plain<ParseSenml>());
    registry.add("builtin:annotate", with_spec<Annotate>());
    registry.add("builtin:identity", plain<Identity>());
    registry.add("builtin:burn", plain<Identity>());
    registry.add("builtin:sink_file", with_spec<SinkFile>());
    registry.add("builtin:sink_count", plain<SinkCount>());
}

}// namespace echo::wrappers
