#include "qc/service.hpp"

#include <cmath>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "qc/errors.hpp"
#include "qc/exporters.hpp"
#include "qc/multigrid.hpp"
#include "qc/slicer.hpp"

namespace qc {

namespace {

using nlohmann::json;

ApiResponse error_response(int status, const std::string& message) {
    return {status, json{{"error", message}}.dump(), "application/json", {}};
}

Vec3 vec_from(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 3) throw std::invalid_argument(std::string(what) + " must be [x,y,z]");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

HalfSpace half_space_from(const json& j) {
    return std::get<HalfSpace>(make_half_space(vec_from(j.at("normal"), "normal"), j.at("offset").get<double>()));
}

Region region_from(const json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "all") return AllSpace{};
    if (type == "half_space") return half_space_from(j);
    if (type == "slab")
        return make_slab(vec_from(j.at("normal"), "normal"), j.at("lo").get<double>(), j.at("hi").get<double>());
    if (type == "ball") return make_ball(vec_from(j.at("center"), "center"), j.at("radius").get<double>());
    if (type == "convex") {
        std::vector<HalfSpace> planes;
        for (const auto& p : j.at("planes")) planes.push_back(half_space_from(p));
        return make_convex(std::move(planes));
    }
    throw std::invalid_argument("unknown region type '" + type + "'");
}

}  // namespace

ApiService::ApiService(std::optional<CellDatabase> db, ServiceOptions options) : options_(options) {
    if (db) db_json_ = std::make_shared<const std::string>(export_json(*db));
}

ApiResponse ApiService::healthz() { return {200, "ok", "text/plain", {}}; }

ApiResponse ApiService::loaded_db() const {
    if (!db_json_) return error_response(404, "no database loaded");
    return {200, *db_json_, "application/json", {}};
}

ApiResponse ApiService::generate(const std::string& body) const {
    GridSpec spec;
    Convention convention = Convention::canonical();
    std::vector<std::string> warnings;
    try {
        const json req = json::parse(body);
        if (!req.is_object()) return error_response(400, "request body must be a JSON object");

        const json& offsets = req.at("offsets");
        if (!offsets.is_array() || offsets.size() != 6)
            return error_response(400, "offsets must be an array of 6 numbers");
        for (std::size_t i = 0; i < 6; ++i) spec.offsets[i] = offsets[i].get<double>();
        warnings = normalize_offsets(spec.offsets);

        const json& range = req.at("range");
        if (!range.is_array() || range.size() != 2 || !range[0].is_number_integer() ||
            !range[1].is_number_integer())
            return error_response(400, "range must be [lo, hi] integers");
        const long long lo = range[0].get<long long>();
        const long long hi = range[1].get<long long>();
        if (lo > hi) return error_response(400, "range must satisfy lo <= hi");
        const long double width = static_cast<long double>(hi) - static_cast<long double>(lo) + 1.0L;
        const long double projected = 20.0L * width * width * width;
        if (projected > static_cast<long double>(options_.max_cells)) {
            std::ostringstream os;
            os << "projected cell count " << static_cast<double>(projected) << " exceeds the cap of "
               << options_.max_cells;
            return error_response(413, os.str());
        }
        spec.range = {static_cast<int>(lo), static_cast<int>(hi)};

        if (req.contains("region") && !req["region"].is_null()) {
            const json& r = req["region"];
            spec.region = region_from(r);
            if (r.contains("mode")) spec.region_mode = parse_slice_mode(r["mode"].get<std::string>());
        }
        if (req.contains("convention")) {
            const std::string name = req["convention"].get<std::string>();
            if (name == "legacy") convention = Convention::legacy();
            else if (name != "canonical") return error_response(400, "convention must be canonical or legacy");
        }
    } catch (const json::exception& e) {
        return error_response(400, std::string("malformed request: ") + e.what());
    } catch (const std::invalid_argument& e) {
        return error_response(400, e.what());
    }

    ApiResponse resp;
    try {
        check(spec);
        resp = {200, export_json(qc::generate(spec, star_basis(), convention).db), "application/json", {}};
    } catch (const Error& e) {
        return error_response(400, e.what());
    }
    for (const auto& w : warnings) resp.headers.emplace_back("Warning", "199 qctool \"" + w + "\"");
    return resp;
}

ApiResponse ApiService::handle(const std::string& method, const std::string& path,
                               const std::string& body) const {
    if (path == "/healthz") return method == "GET" ? healthz() : error_response(405, "method not allowed");
    if (path == "/api/db") return method == "GET" ? loaded_db() : error_response(405, "method not allowed");
    if (path == "/api/generate")
        return method == "POST" ? generate(body) : error_response(405, "method not allowed");
    return error_response(404, "not found");
}

// ---------------------------------------------------------------------------

struct HttpServer::Impl {
    const ApiService& api;
    httplib::Server server;

    explicit Impl(const ApiService& a) : api(a) {
        auto forward = [this](const httplib::Request& req, httplib::Response& res) {
            const ApiResponse r = api.handle(req.method, req.path, req.body);
            res.status = r.status;
            for (const auto& [k, v] : r.headers) res.set_header(k, v);
            res.set_header("Access-Control-Allow-Origin", "*");
            res.set_content(r.body, r.content_type);
        };
        server.Get("/healthz", forward);
        server.Get("/api/db", forward);
        server.Post("/api/generate", forward);
        server.Options("/api/generate", [](const httplib::Request&, httplib::Response& res) {
            res.set_header("Access-Control-Allow-Origin", "*");
            res.set_header("Access-Control-Allow-Methods", "POST, GET, OPTIONS");
            res.set_header("Access-Control-Allow-Headers", "Content-Type");
            res.status = 204;
        });
    }
};

HttpServer::HttpServer(const ApiService& api) : impl_(std::make_unique<Impl>(api)) {}
HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) return impl_->server.bind_to_any_port(host);
    return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen() { return impl_->server.listen_after_bind(); }
void HttpServer::stop() {
    if (impl_->server.is_running()) impl_->server.stop();
}
void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace qc
