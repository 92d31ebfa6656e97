#pragma once

#include <memory>
#include <string>

#include "llm4tag/error.hpp"
#include "llm4tag/pipeline.hpp"

namespace llm4tag {

/// HTTP status for an error code.
int http_status(ErrorCode code) noexcept;

/// JSON-over-HTTP front end for a pipeline.
///
///   POST /v1/contents:tag            body: content object -> report entry
///   GET  /v1/contents/{id}/candidates                      -> candidate list
///   GET  /v1/tags/{id}                                     -> tag object
///   POST /v1/confidence              body: {"content", "tag"} -> {"confidence"}
///   GET  /v1/healthz
///
/// Errors reply with {"error": {"code", "message"}}.
class Service {
public:
    explicit Service(Pipeline& pipeline);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Binds to host:port (port 0 picks a free one) and returns the port.
    int bind(const std::string& host, int port);
    /// Serves until stop(). Call after bind().
    void listen();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace llm4tag
