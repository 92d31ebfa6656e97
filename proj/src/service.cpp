#include "llm4tag/service.hpp"

#include <httplib.h>

namespace llm4tag {

int http_status(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidInput:
        case ErrorCode::ParseError:
        case ErrorCode::InvalidRecord:
            return 400;
        case ErrorCode::UnknownVertex:
            return 404;
        case ErrorCode::DuplicateVertex:
            return 409;
        case ErrorCode::BackendUnavailable:
        case ErrorCode::UnsupportedBackend:
            return 503;
        case ErrorCode::GenerationFailed:
        case ErrorCode::ScoreUnavailable:
            return 502;
        default:
            return 500;
    }
}

namespace {

void reply(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, ErrorCode code, const std::string& message) {
    reply(res, http_status(code), {{"error", {{"code", to_string(code)}, {"message", message}}}});
}

json parse_body(const httplib::Request& req) {
    try {
        return json::parse(req.body);
    } catch (const json::exception& e) {
        fail(ErrorCode::ParseError, std::string("request body: ") + e.what());
    }
}

template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
        try {
            fn(req, res);
        } catch (const Error& e) {
            reply_error(res, e.code(), e.message());
        } catch (const json::exception& e) {
            reply_error(res, ErrorCode::InvalidInput, e.what());
        }
    };
}

}  // namespace

struct Service::Impl {
    Pipeline& pipeline;
    httplib::Server server;
};

Service::Service(Pipeline& pipeline) : impl_(std::make_unique<Impl>(pipeline)) {
    auto& srv = impl_->server;
    Pipeline& p = pipeline;

    srv.Get("/v1/healthz", guarded([](const auto&, auto& res) { reply(res, 200, {{"status", "ok"}}); }));

    srv.Post("/v1/contents:tag", guarded([&p](const auto& req, auto& res) {
        const Content content = content_from_json(parse_body(req));
        const ContentReport entry = p.tag_content(content);
        if (entry.failed()) {
            reply(res, http_status(*entry.error_code), to_json(entry));
            return;
        }
        reply(res, 200, to_json(entry, p.config().report_timings));
    }));

    srv.Get(R"(/v1/contents/([^/]+)/candidates)", guarded([&p](const auto& req, auto& res) {
        const CandidateSet set = p.candidates(ContentId(req.matches[1].str()));
        json list = json::array();
        for (const auto& c : set.entries)
            list.push_back({{"tag", c.tag.str()}, {"score", c.score}, {"provenance", to_string(c.provenance)}});
        reply(res, 200, {{"content", set.content.str()}, {"candidates", std::move(list)}});
    }));

    srv.Get(R"(/v1/tags/([^/]+))", guarded([&p](const auto& req, auto& res) {
        reply(res, 200, to_json(p.repository().get(TagId(req.matches[1].str()))));
    }));

    srv.Post("/v1/confidence", guarded([&p](const auto& req, auto& res) {
        const json body = parse_body(req);
        const Content content = content_from_json(body.at("content"));
        const TagId tag(body.at("tag").template get<std::string>());
        reply(res, 200, {{"content", content.id.str()}, {"tag", tag.str()}, {"confidence", p.confidence(content, tag)}});
    }));
}

Service::~Service() { stop(); }

int Service::bind(const std::string& host, int port) {
    const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
    if (bound < 0) fail(ErrorCode::IoError, "cannot bind " + host + ":" + std::to_string(port));
    return bound;
}

void Service::listen() { impl_->server.listen_after_bind(); }

void Service::stop() { impl_->server.stop(); }

}  // namespace llm4tag
