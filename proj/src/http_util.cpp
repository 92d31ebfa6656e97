#include "http_util.hpp"

#include <httplib.h>

#include "llm4tag/error.hpp"

namespace llm4tag::detail {

SplitUrl split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) fail(ErrorCode::InvalidInput, "URL needs a scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

nlohmann::json post_json(const std::string& url, const std::string& token, int timeout_seconds,
                         const nlohmann::json& body) {
    auto [origin, path] = split_url(url);
    httplib::Client client(origin);
    client.set_connection_timeout(timeout_seconds, 0);
    client.set_read_timeout(timeout_seconds, 0);
    client.set_write_timeout(timeout_seconds, 0);
    httplib::Headers headers;
    if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);

    auto res = client.Post(path, headers, body.dump(), "application/json");
    if (!res) fail(ErrorCode::BackendUnavailable, url + ": " + httplib::to_string(res.error()));
    if (res->status >= 500 || res->status == 429)
        fail(ErrorCode::BackendUnavailable, url + ": HTTP " + std::to_string(res->status));
    if (res->status != 200) fail(ErrorCode::ParseError, url + ": HTTP " + std::to_string(res->status));
    try {
        return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorCode::ParseError, url + ": malformed JSON reply: " + e.what());
    }
}

}  // namespace llm4tag::detail
