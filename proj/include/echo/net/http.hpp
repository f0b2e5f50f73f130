// Copyright 2026 The ECHO Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

namespace echo::net {

using Json = nlohmann::json;

struct Request {
    std::string method;
    std::string path;
    std::vector<std::string> captures;///< regex groups of the matched route pattern
    std::map<std::string, std::string> params;
    std::map<std::string, std::string> headers;
    std::string body;

    std::string param(const std::string& key, const std::string& fallback = {}) const;
    bool has_param(const std::string& key) const { return params.contains(key); }
    std::string header(const std::string& key) const;
};

struct Response {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";

    void json(int code, const Json& doc);
    void error(int code, const std::string& message);
};

/// Threaded HTTP/1.1 server. Handlers run on a pool; exceptions escaping a
/// handler are mapped onto status codes by `status_for_exception`.
class HttpServer {
  public:
    using Handler = std::function<void(const Request&, Response&)>;
    /// Returns false to reject the request with 403.
    using Gate = std::function<bool(const Request&)>;

    explicit HttpServer(std::size_t threads = 32);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    void get(const std::string& pattern, Handler handler);
    void post(const std::string& pattern, Handler handler);
    void del(const std::string& pattern, Handler handler);
    void set_gate(Gate gate);

    /// Binds "host:port" (port 0 picks a free port) and returns the bound port.
    /// Throws IoError naming the address when binding fails.
    int bind(const std::string& listen);
    void start();
    void stop();
    int port() const noexcept { return port_; }
    std::string url() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::thread thread_;
    std::string host_;
    int port_ = 0;
};

/// Maps the echo exception hierarchy onto HTTP status codes.
int status_for_exception(const std::exception& e);

struct HttpResult {
    int status = 0;///< 0 when the request never reached a server
    std::string body;
    std::string error;

    bool reached() const noexcept { return status > 0; }
    bool ok() const noexcept { return status >= 200 && status < 300; }
    Json json() const;
    /// Server-provided error message, falling back to the transport error.
    std::string message() const;
};

struct ClientOptions {
    std::chrono::milliseconds connect_timeout{2000};
    std::chrono::milliseconds read_timeout{10000};
};

/// Stateless request helper bound to a base URL such as "http://127.0.0.1:8080".
class HttpClient {
  public:
    explicit HttpClient(std::string base_url, ClientOptions options = {});

    HttpResult get(const std::string& path) const;
    HttpResult post(const std::string& path, const std::string& body,
                    const std::string& content_type = "application/json") const;
    HttpResult post_json(const std::string& path, const Json& doc) const { return post(path, doc.dump()); }
    HttpResult del(const std::string& path) const;

    void set_header(const std::string& key, const std::string& value) { headers_[key] = value; }
    const std::string& base_url() const noexcept { return base_url_; }

  private:
    std::string base_url_;
    ClientOptions options_;
    std::map<std::string, std::string> headers_;
};

std::string url_encode(std::string_view text);

/// "host:port" → {host, port}. Throws ValidationError.
std::pair<std::string, int> split_host_port(const std::string& listen);

}// namespace echo::net
