#pragma once

#include "memexplain/annotation_store.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <string>

namespace httplib {
class Server;
}

namespace memexplain {

struct AnnotationServerConfig {
    /// Pre-shared opaque token -> annotator id.
    std::map<std::string, std::string> tokens;
    std::string admin_token;
    /// Images are served read-only from here.
    std::filesystem::path image_root;
};

/// HTTP JSON front of an AnnotationStore.
///
///   GET  /api/tasks/next?annotator=<token>   -> task or {"done": true}
///   POST /api/ratings                        (annotator token in ?annotator=, the
///                                             X-Annotator-Token header or the
///                                             body's annotator_id)
///   GET  /api/progress?annotator=<token>
///   GET  /api/items/<id>/image
///   GET  /api/export                         (admin token: ?token= or Bearer)
///
/// Errors are {"error": message, "field": name?} with 400 (invalid), 401
/// (unknown token), 403 (unassigned), 404 (unknown item) or 409 (duplicate,
/// quota full).
class AnnotationServer {
public:
    AnnotationServer(AnnotationStore& store, AnnotationServerConfig config);
    ~AnnotationServer();

    AnnotationServer(const AnnotationServer&) = delete;
    AnnotationServer& operator=(const AnnotationServer&) = delete;

    /// Blocks until stop().
    bool listen(const std::string& host, int port);
    /// Binds an ephemeral port and returns it; serve with listen_after_bind().
    int bind_any_port(const std::string& host);
    bool listen_after_bind();
    void stop();
    void wait_until_ready() const;

private:
    void install_routes();

    AnnotationStore& store_;
    AnnotationServerConfig config_;
    std::unique_ptr<httplib::Server> server_;
};

}  // namespace memexplain
