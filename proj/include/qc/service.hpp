#pragma once

// HTTP front end for interactive regeneration.
//
//   POST /api/generate  {"offsets":[6], "range":[lo,hi], "region"?:{...}, "convention"?:"legacy"}
//   GET  /api/db        the database loaded at startup
//   GET  /healthz       "ok"

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qc/cell.hpp"

namespace qc {

struct ServiceOptions {
    std::size_t max_cells = 100000;  ///< cap on the projected 20·R³ of a generate request
};

struct ApiResponse {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
    std::vector<std::pair<std::string, std::string>> headers;
};

/// Request handling without any transport; every method is const and safe to
/// call concurrently.
class ApiService {
public:
    explicit ApiService(std::optional<CellDatabase> db = std::nullopt, ServiceOptions options = {});

    ApiResponse handle(const std::string& method, const std::string& path, const std::string& body) const;

    ApiResponse generate(const std::string& body) const;
    ApiResponse loaded_db() const;
    static ApiResponse healthz();

private:
    std::shared_ptr<const std::string> db_json_;
    ServiceOptions options_;
};

/// Owns an HTTP listener serving an ApiService.
class HttpServer {
public:
    explicit HttpServer(const ApiService& api);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds to host:port (0 picks a free port); returns the port, or -1 on failure.
    int bind(const std::string& host, int port);
    /// Serves until stop() is called.
    bool listen();
    void stop();
    void wait_until_ready() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace qc
