#include "memexplain/annotation_server.hpp"

#include "memexplain/error.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <fstream>
#include <sstream>

namespace memexplain {
namespace {

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message, const std::string& field = {}) {
    json body = {{"error", message}};
    if (!field.empty()) body["field"] = field;
    send_json(res, status, body);
}

int status_for(StoreError::Kind kind) {
    switch (kind) {
        case StoreError::Kind::invalid: return 400;
        case StoreError::Kind::unknown_annotator: return 401;
        case StoreError::Kind::unassigned: return 403;
        case StoreError::Kind::unknown_item: return 404;
        case StoreError::Kind::duplicate:
        case StoreError::Kind::quota_full: return 409;
    }
    return 400;
}

std::string mime_for(const std::filesystem::path& p) {
    std::string ext = p.extension().string();
    for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (ext == ".png") return "image/png";
    if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
    if (ext == ".gif") return "image/gif";
    if (ext == ".webp") return "image/webp";
    return "application/octet-stream";
}

}  // namespace

AnnotationServer::AnnotationServer(AnnotationStore& store, AnnotationServerConfig config)
    : store_(store), config_(std::move(config)), server_(std::make_unique<httplib::Server>()) {
    for (const auto& [token, annotator] : config_.tokens) {
        if (token.empty()) throw ValidationError("empty annotator token", "annotation.tokens");
        if (!store_.is_annotator(annotator)) {
            throw ValidationError("token maps to unregistered annotator '" + annotator + "'", "annotation.tokens");
        }
    }
    install_routes();
}

AnnotationServer::~AnnotationServer() { stop(); }

void AnnotationServer::install_routes() {
    auto resolve = [this](const std::string& token) -> const std::string* {
        const auto it = config_.tokens.find(token);
        return it == config_.tokens.end() ? nullptr : &it->second;
    };

    server_->set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            spdlog::error("annotation server: {}", e.what());
            send_error(res, 500, "internal error");
        }
    });

    server_->Get("/api/tasks/next", [this, resolve](const httplib::Request& req, httplib::Response& res) {
        const std::string* annotator = resolve(req.get_param_value("annotator"));
        if (annotator == nullptr) return send_error(res, 401, "unknown annotator token", "annotator");
        const auto task = store_.next_task(*annotator);
        if (!task) return send_json(res, 200, {{"done", true}});
        json body = to_json(*task);
        body["done"] = false;
        send_json(res, 200, body);
    });

    server_->Post("/api/ratings", [this, resolve](const httplib::Request& req, httplib::Response& res) {
        json body = json::parse(req.body, nullptr, false);
        if (body.is_discarded() || !body.is_object()) return send_error(res, 400, "body must be a JSON object");
        std::string token = req.get_param_value("annotator");
        if (token.empty()) token = req.get_header_value("X-Annotator-Token");
        if (token.empty() && body.contains("annotator_id") && body["annotator_id"].is_string()) {
            token = body["annotator_id"].get<std::string>();
        }
        const std::string* annotator = resolve(token);
        if (annotator == nullptr) return send_error(res, 401, "unknown annotator token", "annotator_id");
        body["annotator_id"] = *annotator;
        try {
            const AnnotationRating rating = rating_from_json(body, store_.options().bounds);
            store_.submit(rating);
            json ack = {{"accepted", true}, {"item_id", rating.item_id}};
            ack["progress"] = to_json(store_.progress(*annotator));
            send_json(res, 201, ack);
        } catch (const StoreError& e) {
            send_error(res, status_for(e.kind()), e.what(), e.field());
        } catch (const ValidationError& e) {
            send_error(res, 400, e.what(), e.field());
        }
    });

    server_->Get("/api/progress", [this, resolve](const httplib::Request& req, httplib::Response& res) {
        const std::string* annotator = resolve(req.get_param_value("annotator"));
        if (annotator == nullptr) return send_error(res, 401, "unknown annotator token", "annotator");
        send_json(res, 200, to_json(store_.progress(*annotator)));
    });

    server_->Get(R"(/api/items/([^/]+)/image)", [this](const httplib::Request& req, httplib::Response& res) {
        const AnnotationTask* item = store_.find_item(req.matches[1].str());
        if (item == nullptr) return send_error(res, 404, "unknown item", "item_id");
        std::error_code ec;
        const auto root = std::filesystem::weakly_canonical(config_.image_root, ec);
        const auto file = std::filesystem::weakly_canonical(config_.image_root / item->image_ref, ec);
        const auto rel = file.lexically_relative(root);
        if (ec || rel.empty() || *rel.begin() == "..") return send_error(res, 404, "image not available");
        std::ifstream in(file, std::ios::binary);
        if (!in) return send_error(res, 404, "image not available");
        std::ostringstream bytes;
        bytes << in.rdbuf();
        res.set_content(bytes.str(), mime_for(file));
    });

    server_->Get("/api/export", [this](const httplib::Request& req, httplib::Response& res) {
        std::string token = req.get_param_value("token");
        const std::string auth = req.get_header_value("Authorization");
        if (token.empty() && auth.starts_with("Bearer ")) token = auth.substr(7);
        if (config_.admin_token.empty() || token != config_.admin_token) {
            return send_error(res, 401, "admin token required");
        }
        std::string out;
        for (const auto& r : store_.export_ratings()) out += to_json(r).dump() + "\n";
        res.set_content(out, "application/x-ndjson");
    });
}

bool AnnotationServer::listen(const std::string& host, int port) { return server_->listen(host, port); }

int AnnotationServer::bind_any_port(const std::string& host) { return server_->bind_to_any_port(host); }

bool AnnotationServer::listen_after_bind() { return server_->listen_after_bind(); }

void AnnotationServer::stop() {
    if (server_) server_->stop();
}

void AnnotationServer::wait_until_ready() const { server_->wait_until_ready(); }

}  // namespace memexplain
