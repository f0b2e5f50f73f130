// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#include <echo/common/error.hpp>
#include <echo/net/http.hpp>

#include <httplib.h>

#include <spdlog/spdlog.h>

namespace echo::net {

std::string Request::param(const std::string& key, const std::string& fallback) const {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

std::string Request::header(const std::string& key) const {
    const auto it = headers.find(key);
    return it == headers.end() ? std::string() : it->second;
}

void Response::json(int code, const Json& doc) {
    status = code;
    body = doc.dump();
    content_type = "application/json";
}

void Response::error(int code, const std::string& message) { json(code, Json{{"error", message}}); }

int status_for_exception(const std::exception& e) {
    if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const ParseError*>(&e)) {
        return 400;
    }
    if (dynamic_cast<const NotFound*>(&e)) {
        return 404;
    }
    if (dynamic_cast<const Conflict*>(&e) || dynamic_cast<const CapacityError*>(&e)) {
        return 409;
    }
    if (dynamic_cast<const UnreachableError*>(&e)) {
        return 502;
    }
    return 500;
}

struct HttpServer::Impl {
    httplib::Server server;
    Gate gate;
};

namespace {

Request convert(const httplib::Request& in) {
    Request out;
    out.method = in.method;
    out.path = in.path;
    for (std::size_t i = 1; i < in.matches.size(); ++i) {
        out.captures.push_back(in.matches[i].str());
    }
    for (const auto& [k, v] : in.params) {
        out.params.emplace(k, v);
    }
    for (const auto& [k, v] : in.headers) {
        out.headers.emplace(k, v);
    }
    out.body = in.body;
    return out;
}

httplib::Server::Handler adapt(HttpServer::Handler handler) {
    return [handler = std::move(handler)](const httplib::Request& in, httplib::Response& out) {
        Response res;
        try {
            handler(convert(in), res);
        } catch (const ValidationError& e) {
            res.json(400, Json{{"error", e.what()}, {"violations", e.violations()}});
        } catch (const std::exception& e) {
            res.error(status_for_exception(e), e.what());
        }
        out.status = res.status;
        if (!res.body.empty() || res.status != 204) {
            out.set_content(res.body, res.content_type);
        }
    };
}

}// namespace

HttpServer::HttpServer(std::size_t threads) : impl_(std::make_unique<Impl>()) {
    impl_->server.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
    impl_->server.set_keep_alive_timeout(1);
    impl_->server.set_read_timeout(30, 0);
    impl_->server.set_write_timeout(30, 0);
    impl_->server.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
        if (impl_->gate && !impl_->gate(convert(req))) {
            res.status = 403;
            res.set_content(R"({"error":"connection refused by reachability policy"})", "application/json");
            return httplib::Server::HandlerResponse::Handled;
        }
        return httplib::Server::HandlerResponse::Unhandled;
    });
}

HttpServer::~HttpServer() { stop(); }

void HttpServer::get(const std::string& pattern, Handler handler) { impl_->server.Get(pattern, adapt(std::move(handler))); }

void HttpServer::post(const std::string& pattern, Handler handler) {
    impl_->server.Post(pattern, adapt(std::move(handler)));
}

void HttpServer::del(const std::string& pattern, Handler handler) {
    impl_->server.Delete(pattern, adapt(std::move(handler)));
}

void HttpServer::set_gate(Gate gate) { impl_->gate = std::move(gate); }

int HttpServer::bind(const std::string& listen) {
    auto [host, port] = split_host_port(listen);
    host_ = host;
    if (port == 0) {
        port_ = impl_->server.bind_to_any_port(host);
    } else {
        port_ = impl_->server.bind_to_port(host, port) ? port : -1;
    }
    if (port_ <= 0) {
        throw IoError("cannot listen on " + listen + " (port " + std::to_string(port) + " in use?)");
    }
    return port_;
}

void HttpServer::start() {
    thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

void HttpServer::stop() {
    if (impl_) {
        impl_->server.stop();
    }
    if (thread_.joinable()) {
        thread_.join();
    }
}

std::string HttpServer::url() const {
    const std::string host = (host_ == "0.0.0.0" || host_.empty()) ? "127.0.0.1" : host_;
    return "http://" + host + ":" + std::to_string(port_);
}

Json HttpResult::json() const {
    if (body.empty()) {
        return Json::object();
    }
    try {
        return Json::parse(body);
    } catch (const Json::parse_error& e) {
        throw ParseError(std::string("invalid JSON response: ") + e.what());
    }
}

std::string HttpResult::message() const {
    if (!reached()) {
        return error;
    }
    try {
        auto doc = Json::parse(body);
        if (doc.is_object() && doc.contains("error")) {
            return doc["error"].get<std::string>();
        }
    } catch (...) {
    }
    return body.empty() ? "HTTP " + std::to_string(status) : body;
}

HttpClient::HttpClient(std::string base_url, ClientOptions options)
    : base_url_(std::move(base_url)), options_(options) {
    while (!base_url_.empty() && base_url_.back() == '/') {
        base_url_.pop_back();
    }
}

namespace {

template<typename Fn>
HttpResult perform(const std::string& base, const ClientOptions& opts, const std::map<std::string, std::string>& hdrs,
                   Fn&& fn) {
    HttpResult result;
    httplib::Client client(base);
    client.set_connection_timeout(opts.connect_timeout);
    client.set_read_timeout(opts.read_timeout);
    client.set_write_timeout(opts.read_timeout);
    httplib::Headers headers;
    for (const auto& [k, v] : hdrs) {
        headers.emplace(k, v);
    }
    if (!client.is_valid()) {
        result.error = "invalid base URL " + base;
        return result;
    }
    auto res = fn(client, headers);
    if (!res) {
        result.error = "cannot reach " + base + ": " + httplib::to_string(res.error());
        return result;
    }
    result.status = res->status;
    result.body = std::move(res->body);
    return result;
}

}// namespace

HttpResult HttpClient::get(const std::string& path) const {
    return perform(base_url_, options_, headers_, [&](httplib::Client& c, const httplib::Headers& h) { return c.Get(path, h); });
}

HttpResult HttpClient::post(const std::string& path, const std::string& body, const std::string& content_type) const {
    return perform(base_url_, options_, headers_,
                   [&](httplib::Client& c, const httplib::Headers& h) { return c.Post(path, h, body, content_type); });
}

HttpResult HttpClient::del(const std::string& path) const {
    return perform(base_url_, options_, headers_, [&](httplib::Client& c, const httplib::Headers& h) { return c.Delete(path, h); });
}

std::string url_encode(std::string_view text) {
    static constexpr char kHex[] = "0123456789ABCDEF";
    std::string out;
    out.reserve(text.size());
    for (const unsigned char c : text) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back('%');
            out.push_back(kHex[c >> 4]);
            out.push_back(kHex[c & 0xf]);
        }
    }
    return out;
}

std::pair<std::string, int> split_host_port(const std::string& listen) {
    std::string s = listen;
    if (s.rfind("http://", 0) == 0) {
        s = s.substr(7);
    }
    const auto colon = s.rfind(':');
    if (colon == std::string::npos) {
        throw ValidationError("listen address '" + listen + "' must be host:port");
    }
    try {
        const int port = std::stoi(s.substr(colon + 1));
        if (port < 0 || port > 65535) {
            throw std::out_of_range("port");
        }
        return {s.substr(0, colon), port};
    } catch (const std::logic_error&) {
        throw ValidationError("listen address '" + listen + "' has an invalid port");
    }
}

}// namespace echo::net
