#pragma once

#include <semaphore>
#include <string>

#include <json.hpp>

namespace llm4tag::detail {

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

SplitUrl split_url(const std::string& url);

/// POSTs a JSON body and returns the parsed JSON reply. Connection errors
/// and 5xx replies raise BackendUnavailable; other non-200 replies and
/// malformed bodies raise ParseError.
nlohmann::json post_json(const std::string& url, const std::string& token, int timeout_seconds,
                         const nlohmann::json& body);

class SemaphoreGuard {
public:
    explicit SemaphoreGuard(std::counting_semaphore<1024>& sem) : sem_(sem) { sem_.acquire(); }
    ~SemaphoreGuard() { sem_.release(); }
    SemaphoreGuard(const SemaphoreGuard&) = delete;
    SemaphoreGuard& operator=(const SemaphoreGuard&) = delete;

private:
    std::counting_semaphore<1024>& sem_;
};

}  // namespace llm4tag::detail
