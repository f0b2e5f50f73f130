// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#include <echo/catalog/catalog_client.hpp>
#include <echo/common/error.hpp>
#include <echo/common/time.hpp>
#include <echo/engine/engine.hpp>

#include <spdlog/spdlog.h>

#include <unistd.h>

namespace echo::engine {

namespace fs = std::filesystem;
using data::DataBatch;
using Json = nlohmann::json;

struct Engine::Fragment {
    std::string id;
    flow::FragmentDescriptor desc;
    std::map<std::string, std::shared_ptr<EdgeQueue>> in_queues;///< downstream side of internal edges and inbound links
    std::map<std::string, std::shared_ptr<EdgeQueue>> out_queues;///< outbound links
    std::map<std::string, std::unique_ptr<ProcessorInstance>> processors;
    std::map<std::string, std::shared_ptr<RemoteLink>> links;
    bool started = false;
    std::mutex control;

    ProcessorInstance& processor(const std::string& pid) {
        const auto it = processors.find(pid);
        if (it == processors.end()) {
            throw NotFound("fragment " + id + " has no processor " + pid);
        }
        return *it->second;
    }
};

Engine::Engine(EngineOptions options, const ProcessorRegistry& registry)
    : options_(std::move(options)),
      registry_(registry),
      throttle_(options_.cpu_millis, ThrottleProfile::named(options_.profile)) {
    if (options_.workdir.empty()) {
        options_.workdir = fs::temp_directory_path() / ("echo-engine-" + options_.worker_id + "-" + std::to_string(::getpid()));
    }
    fs::create_directories(options_.workdir);
}

Engine::~Engine() { shutdown(); }

void Engine::shutdown() {
    {
        std::lock_guard lock(metrics_mu_);
        metrics_stop_ = true;
    }
    metrics_cv_.notify_all();
    if (metrics_thread_.joinable()) {
        metrics_thread_.join();
    }
    std::map<std::string, std::shared_ptr<Fragment>> frags;
    {
        std::unique_lock lock(mu_);
        frags.swap(fragments_);
        links_.clear();
    }
    for (auto& [id, frag] : frags) {
        std::lock_guard lock(frag->control);
        for (auto& [lid, link] : frag->links) {
            link->stop();
        }
        for (auto& [pid, proc] : frag->processors) {
            proc->stop();
        }
    }
}

std::shared_ptr<Engine::Fragment> Engine::find(const std::string& fragment) const {
    std::shared_lock lock(mu_);
    const auto it = fragments_.find(fragment);
    if (it == fragments_.end()) {
        throw NotFound("no fragment " + fragment + " on worker " + options_.worker_id);
    }
    return it->second;
}

std::shared_ptr<RemoteLink> Engine::find_link(const std::string& link_id) const {
    std::shared_lock lock(mu_);
    const auto it = links_.find(link_id);
    if (it == links_.end()) {
        throw NotFound("no link " + link_id + " on worker " + options_.worker_id);
    }
    return it->second;
}

bool Engine::has_fragment(const std::string& fragment) const {
    std::shared_lock lock(mu_);
    return fragments_.contains(fragment);
}

void Engine::index_links() {
    std::unique_lock lock(mu_);
    links_.clear();
    for (const auto& [fid, frag] : fragments_) {
        for (const auto& [lid, link] : frag->links) {
            links_[lid] = link;
        }
    }
}

void Engine::apply(Fragment& frag, const flow::FragmentDescriptor& desc, bool initial) {
    std::set<std::string> wanted_procs;
    for (const auto& p : desc.processors) {
        if (!wanted_procs.insert(p.id).second) {
            throw ValidationError("duplicate processor " + p.id + " in fragment");
        }
    }
    std::set<std::string> needed_in;
    std::set<std::string> needed_out;
    for (const auto& e : desc.edges) {
        if (!wanted_procs.contains(e.from) || !wanted_procs.contains(e.to)) {
            throw ValidationError("edge " + e.key + " names a processor outside the fragment");
        }
        needed_in.insert(e.key);
    }
    std::map<std::string, const flow::LinkDesc*> wanted_links;
    for (const auto& l : desc.links) {
        if (!wanted_procs.contains(l.local_processor)) {
            throw ValidationError("link " + l.id + " names a processor outside the fragment");
        }
        if (l.peer_url.empty()) {
            throw ValidationError("link " + l.id + " lacks a peer URL");
        }
        (l.outbound ? needed_out : needed_in).insert(l.edge_key);
        wanted_links[l.id] = &l;
    }
    for (const auto& [key, q] : frag.in_queues) {
        if (!needed_in.contains(key) && q->depth() > 0) {
            throw Conflict("queue " + key + " still holds " + std::to_string(q->depth()) + " batches");
        }
    }
    for (const auto& [key, q] : frag.out_queues) {
        if (!needed_out.contains(key) && q->depth() > 0) {
            throw Conflict("outbound queue " + key + " still holds " + std::to_string(q->depth()) + " batches");
        }
    }

    // Build new processors before touching anything so a bad kind leaves the fragment intact.
    std::map<std::string, std::unique_ptr<ProcessorInstance>> created;
    for (const auto& p : desc.processors) {
        if (frag.processors.contains(p.id)) {
            continue;
        }
        ProcessorContext ctx;
        ctx.dataflow = desc.dataflow;
        ctx.worker_id = options_.worker_id;
        ctx.device = options_.device;
        ctx.workdir = options_.workdir / desc.dataflow / p.id;
        ctx.throttle = &throttle_;
        fs::create_directories(ctx.workdir);
        auto logic = registry_.create(p, ctx);
        created.emplace(p.id, std::make_unique<ProcessorInstance>(p, std::move(logic), ctx, desc.paused.contains(p.id)));
    }

    for (auto it = frag.processors.begin(); it != frag.processors.end();) {
        if (!wanted_procs.contains(it->first)) {
            it->second->stop();
            std::error_code ec;
            fs::remove_all(options_.workdir / desc.dataflow / it->first, ec);
            it = frag.processors.erase(it);
        } else {
            ++it;
        }
    }
    for (auto it = frag.links.begin(); it != frag.links.end();) {
        const auto w = wanted_links.find(it->first);
        if (w == wanted_links.end() || !(*w->second == it->second->desc())) {
            it->second->stop();
            it = frag.links.erase(it);
        } else {
            ++it;
        }
    }
    for (const auto& key : needed_in) {
        if (!frag.in_queues.contains(key)) {
            frag.in_queues[key] = std::make_shared<EdgeQueue>(options_.queue_capacity);
        }
    }
    for (const auto& key : needed_out) {
        if (!frag.out_queues.contains(key)) {
            frag.out_queues[key] = std::make_shared<EdgeQueue>(options_.queue_capacity);
        }
    }
    std::vector<std::shared_ptr<RemoteLink>> new_links;
    for (const auto& [lid, l] : wanted_links) {
        if (frag.links.contains(lid)) {
            continue;
        }
        auto q = l->outbound ? frag.out_queues.at(l->edge_key) : frag.in_queues.at(l->edge_key);
        auto link = std::make_shared<RemoteLink>(*l, std::move(q), options_.device);
        frag.links[lid] = link;
        new_links.push_back(std::move(link));
    }
    for (auto& [pid, proc] : created) {
        frag.processors.emplace(pid, std::move(proc));
    }

    for (auto& [pid, proc] : frag.processors) {
        std::vector<InputPort> inputs;
        std::vector<OutputPort> outputs;
        for (const auto& e : desc.edges) {
            if (e.to == pid) {
                inputs.push_back({e.key, e.from, frag.in_queues.at(e.key)});
            }
            if (e.from == pid) {
                outputs.push_back({e.key, e.to, frag.in_queues.at(e.key)});
            }
        }
        for (const auto& l : desc.links) {
            if (l.local_processor != pid) {
                continue;
            }
            if (l.outbound) {
                outputs.push_back({l.edge_key, l.remote_processor, frag.out_queues.at(l.edge_key)});
            } else {
                inputs.push_back({l.edge_key, l.remote_processor, frag.in_queues.at(l.edge_key)});
            }
        }
        proc->set_inputs(std::move(inputs));
        proc->set_outputs(std::move(outputs));
    }
    std::erase_if(frag.in_queues, [&](const auto& kv) { return !needed_in.contains(kv.first); });
    std::erase_if(frag.out_queues, [&](const auto& kv) { return !needed_out.contains(kv.first); });

    frag.desc = desc;
    if (frag.started && !initial) {
        for (auto& link : new_links) {
            link->start();
        }
        for (const auto& p : desc.processors) {
            if (auto& proc = frag.processors.at(p.id); proc->state() == ProcState::deployed) {
                proc->start();
            }
        }
    }
}

void Engine::deploy(const flow::FragmentDescriptor& desc) {
    if (has_fragment(desc.dataflow)) {
        throw Conflict("fragment " + desc.dataflow + " already deployed on worker " + options_.worker_id);
    }
    auto frag = std::make_shared<Fragment>();
    frag->id = desc.dataflow;
    {
        std::lock_guard lock(frag->control);
        apply(*frag, desc, true);
    }
    {
        std::unique_lock lock(mu_);
        if (!fragments_.emplace(desc.dataflow, frag).second) {
            throw Conflict("fragment " + desc.dataflow + " already deployed on worker " + options_.worker_id);
        }
    }
    index_links();
    spdlog::info("engine {}: deployed fragment {} ({} processors, {} links)", options_.worker_id, desc.dataflow,
                 desc.processors.size(), desc.links.size());
}

void Engine::start(const std::string& fragment) {
    auto frag = find(fragment);
    std::lock_guard lock(frag->control);
    if (frag->started) {
        throw Conflict("fragment " + fragment + " is already running");
    }
    frag->started = true;
    for (auto& [lid, link] : frag->links) {
        link->start();
    }
    for (auto& [pid, proc] : frag->processors) {
        if (proc->state() == ProcState::deployed) {
            proc->start();
        }
    }
}

bool Engine::pause(const std::string& fragment, const std::string& processor) {
    auto frag = find(fragment);
    std::lock_guard lock(frag->control);
    auto& proc = frag->processor(processor);
    if (proc.state() == ProcState::deployed) {
        throw Conflict("processor " + processor + " cannot pause from state deployed");
    }
    return proc.pause();
}

void Engine::resume(const std::string& fragment, const std::string& processor) {
    auto frag = find(fragment);
    std::lock_guard lock(frag->control);
    frag->processor(processor).resume();
}

Json Engine::undeploy(const std::string& fragment) {
    auto frag = find(fragment);
    Json left = Json::object();
    {
        std::lock_guard lock(frag->control);
        for (auto& [lid, link] : frag->links) {
            link->stop();
        }
        for (auto& [pid, proc] : frag->processors) {
            proc->stop();
        }
        for (const auto& [key, q] : frag->in_queues) {
            left[key] = q->depth();
        }
        for (const auto& [key, q] : frag->out_queues) {
            left[key + "@out"] = q->depth();
        }
    }
    {
        std::unique_lock lock(mu_);
        fragments_.erase(fragment);
    }
    index_links();
    std::error_code ec;
    fs::remove_all(options_.workdir / fragment, ec);
    spdlog::info("engine {}: undeployed fragment {}", options_.worker_id, fragment);
    return Json{{"fragment", fragment}, {"queued", left}};
}

void Engine::rewire(const flow::FragmentDescriptor& desc) {
    auto frag = find(desc.dataflow);
    {
        std::lock_guard lock(frag->control);
        apply(*frag, desc, false);
    }
    index_links();
    spdlog::info("engine {}: rewired fragment {} ({} processors, {} links)", options_.worker_id, desc.dataflow,
                 desc.processors.size(), desc.links.size());
}

Json Engine::queues(const std::string& fragment) const {
    auto frag = find(fragment);
    std::lock_guard lock(frag->control);
    Json in = Json::object();
    Json out = Json::object();
    for (const auto& [key, q] : frag->in_queues) {
        in[key] = {{"depth", q->depth()}, {"tuples", q->tuples()}, {"capacity", q->capacity()}};
    }
    for (const auto& [key, q] : frag->out_queues) {
        out[key] = {{"depth", q->depth()}, {"tuples", q->tuples()}, {"capacity", q->capacity()}};
    }
    return Json{{"fragment", fragment}, {"in", in}, {"out", out}};
}

std::vector<DataBatch> Engine::take(const std::string& fragment, const std::string& edge_key) {
    auto frag = find(fragment);
    std::lock_guard lock(frag->control);
    const auto it = frag->in_queues.find(edge_key);
    if (it == frag->in_queues.end()) {
        throw NotFound("fragment " + fragment + " has no input queue " + edge_key);
    }
    return it->second->take_all();
}

void Engine::inject(const std::string& fragment, const std::string& edge_key, std::vector<DataBatch> batches) {
    auto frag = find(fragment);
    std::lock_guard lock(frag->control);
    const auto it = frag->in_queues.find(edge_key);
    if (it == frag->in_queues.end()) {
        throw NotFound("fragment " + fragment + " has no input queue " + edge_key);
    }
    it->second->inject(std::move(batches));
}

Json Engine::fragment_metrics(const std::string& fragment) const {
    auto frag = find(fragment);
    std::lock_guard lock(frag->control);
    Json procs = Json::object();
    for (const auto& [pid, proc] : frag->processors) {
        procs[pid] = proc->metrics();
    }
    Json queues = Json::object();
    for (const auto& [key, q] : frag->in_queues) {
        queues[key] = {{"depth", q->depth()}, {"tuples", q->tuples()}};
    }
    for (const auto& [key, q] : frag->out_queues) {
        queues[key + "@out"] = {{"depth", q->depth()}, {"tuples", q->tuples()}};
    }
    Json links = Json::array();
    for (const auto& [lid, link] : frag->links) {
        links.push_back(link->status());
    }
    return Json{{"fragment", fragment},
                {"worker", options_.worker_id},
                {"started", frag->started},
                {"processors", procs},
                {"queues", queues},
                {"links", links}};
}

Json Engine::list() const {
    std::vector<std::shared_ptr<Fragment>> frags;
    {
        std::shared_lock lock(mu_);
        for (const auto& [id, f] : fragments_) {
            frags.push_back(f);
        }
    }
    Json out = Json::array();
    for (const auto& f : frags) {
        std::lock_guard lock(f->control);
        Json procs = Json::object();
        for (const auto& [pid, proc] : f->processors) {
            procs[pid] = to_string(proc->state());
        }
        out.push_back({{"fragment", f->id}, {"started", f->started}, {"processors", procs}});
    }
    return out;
}

RemoteLink::Receipt Engine::link_receive(const std::string& link_id, const DataBatch& batch) {
    auto link = find_link(link_id);
    if (link->desc().outbound || link->desc().direction != flow::LinkDirection::push) {
        throw Conflict("link " + link_id + " does not accept pushed batches here");
    }
    return link->receive(batch);
}

std::vector<DataBatch> Engine::link_serve(const std::string& link_id, std::size_t max, std::chrono::milliseconds wait) {
    auto link = find_link(link_id);
    if (!link->desc().outbound || link->desc().direction != flow::LinkDirection::pull) {
        throw Conflict("link " + link_id + " is not served for pulling here");
    }
    return link->serve(max, wait);
}

std::size_t Engine::link_ack(const std::string& link_id, const std::set<std::string>& ids) {
    auto link = find_link(link_id);
    if (!link->desc().outbound || link->desc().direction != flow::LinkDirection::pull) {
        throw Conflict("link " + link_id + " is not served for pulling here");
    }
    return link->ack(ids);
}

bool Engine::admits(const std::string& device) const {
    if (options_.reachable_from.contains("*")) {
        return true;
    }
    return !device.empty() && (device == options_.device || options_.reachable_from.contains(device));
}

void Engine::start_metrics() {
    if (options_.catalog_url.empty() || metrics_thread_.joinable()) {
        return;
    }
    metrics_thread_ = std::thread([this] { metrics_loop(); });
}

void Engine::metrics_loop() {
    std::unique_lock lock(metrics_mu_);
    while (!metrics_cv_.wait_for(lock, options_.metrics_interval, [this] { return metrics_stop_; })) {
        lock.unlock();
        try {
            report_metrics();
        } catch (const std::exception& e) {
            spdlog::warn("engine {}: metrics: {}", options_.worker_id, e.what());
        }
        lock.lock();
    }
}

std::size_t Engine::buffered_samples() const {
    std::lock_guard lock(metrics_mu_);
    return pending_.size();
}

Json Engine::report_metrics() {
    const auto now = std::chrono::steady_clock::now();
    double cpu_pct = 0;
    double mem_mb = 0;
    if (auto s = sample_process(::getpid())) {
        cpu_pct = cpu_meter_.update(s->cpu_seconds, now, options_.cpu_millis);
        mem_mb = static_cast<double>(s->rss_bytes) / (1024.0 * 1024.0);
    }
    const double throttle_pct = throttle_.utilisation_pct();

    std::vector<std::string> ids;
    {
        std::shared_lock lock(mu_);
        for (const auto& [id, f] : fragments_) {
            ids.push_back(id);
        }
    }
    Json worker_doc{{"worker", options_.worker_id},
                    {"device", options_.device},
                    {"cpu_pct", cpu_pct},
                    {"mem_mb", mem_mb},
                    {"throttle_pct", throttle_pct},
                    {"fragments", ids}};
    std::vector<catalog::CatalogItem> sample;
    for (const auto& id : ids) {
        Json doc;
        try {
            doc = fragment_metrics(id);
        } catch (const NotFound&) {
            continue;
        }
        for (auto& [pid, m] : doc["processors"].items()) {
            const auto key = id + "/" + pid;
            const auto prev = last_counts_.find(key);
            if (prev != last_counts_.end()) {
                const double dt = std::chrono::duration<double>(now - prev->second.first).count();
                for (const auto* field : {"in_batches", "in_tuples", "out_batches", "out_tuples"}) {
                    const double delta = m[field].get<double>() - prev->second.second[field].get<double>();
                    m[std::string(field) + "_per_s"] = dt > 0 ? delta / dt : 0.0;
                }
            } else {
                for (const auto* field : {"in_batches", "in_tuples", "out_batches", "out_tuples"}) {
                    m[std::string(field) + "_per_s"] = 0.0;
                }
            }
            last_counts_[key] = {now, m};
        }
        catalog::CatalogItem item{"/dataflow/" + id + "/metrics/" + options_.worker_id, {}};
        item.set("urn:echo:rel:worker", options_.worker_id);
        item.set("urn:echo:rel:sampledAt", now_iso8601());
        item.set("urn:echo:rel:metrics", doc.dump());
        sample.push_back(std::move(item));
    }
    catalog::CatalogItem w{"/worker/" + options_.worker_id + "/metrics", {}};
    w.set("urn:echo:rel:CPUUtil", std::to_string(cpu_pct));
    w.set("urn:echo:rel:MemUtil", std::to_string(options_.mem_mb > 0 ? 100.0 * mem_mb / options_.mem_mb : 0.0));
    w.set("urn:echo:rel:throttleUtil", std::to_string(throttle_pct));
    w.set("urn:echo:rel:sampledAt", now_iso8601());
    w.set("urn:echo:rel:metrics", worker_doc.dump());
    sample.push_back(std::move(w));

    if (!options_.catalog_url.empty()) {
        net::ClientOptions opts;
        opts.connect_timeout = std::chrono::milliseconds(500);
        opts.read_timeout = std::chrono::milliseconds(2000);
        catalog::CatalogClient client(options_.catalog_url, opts);
        std::lock_guard lock(metrics_mu_);
        pending_.push_back(std::move(sample));
        while (pending_.size() > 100) {
            pending_.pop_front();
        }
        try {
            while (!pending_.empty()) {
                for (const auto& item : pending_.front()) {
                    client.put(item);
                }
                pending_.pop_front();
            }
        } catch (const std::exception& e) {
            spdlog::debug("engine {}: catalog unavailable, {} samples buffered: {}", options_.worker_id, pending_.size(),
                          e.what());
        }
    }
    worker_doc["dataflows"] = ids.size();
    return worker_doc;
}

}// namespace echo::engine
