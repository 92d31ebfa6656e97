#include "llm4tag/completion.hpp"

#include <algorithm>
#include <fstream>

#include "http_util.hpp"
#include "llm4tag/error.hpp"
#include "llm4tag/jsonl.hpp"
#include "llm4tag/util.hpp"

namespace llm4tag {

nlohmann::json to_json(const TokenScore& score) {
    nlohmann::json alts = nlohmann::json::array();
    for (const auto& a : score.top_alternatives) alts.push_back({{"token", a.token}, {"logprob", a.logprob}});
    return {{"token", score.token}, {"logprob", score.logprob}, {"top_alternatives", std::move(alts)}};
}

TokenScore token_score_from_json(const nlohmann::json& j) {
    TokenScore s;
    s.token = j.at("token").get<std::string>();
    s.logprob = j.at("logprob").get<double>();
    if (auto it = j.find("top_alternatives"); it != j.end() && !it->is_null()) {
        for (const auto& a : *it) s.top_alternatives.push_back({a.at("token").get<std::string>(), a.at("logprob").get<double>()});
    }
    return s;
}

CompletionResult completion_result_from_json(const nlohmann::json& j) {
    try {
        CompletionResult r;
        r.text = j.at("text").get<std::string>();
        if (auto it = j.find("token_scores"); it != j.end() && !it->is_null()) {
            std::vector<TokenScore> scores;
            for (const auto& s : *it) scores.push_back(token_score_from_json(s));
            r.token_scores = std::move(scores);
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::ParseError, std::string("malformed completion reply: ") + e.what());
    }
}

nlohmann::json to_json(const CompletionResult& result) {
    nlohmann::json j = {{"text", result.text}};
    if (result.token_scores) {
        j["token_scores"] = nlohmann::json::array();
        for (const auto& s : *result.token_scores) j["token_scores"].push_back(to_json(s));
    }
    return j;
}

std::string prompt_fingerprint(std::string_view prompt) { return to_hex(fnv1a64(prompt)); }

MockCompletionClient::MockCompletionClient(bool supports_token_scores)
    : supports_token_scores_(supports_token_scores) {}

void MockCompletionClient::add_fingerprint_rule(std::string fingerprint, Reply reply) {
    std::lock_guard lock(mutex_);
    by_fingerprint_.insert_or_assign(std::move(fingerprint), std::move(reply));
}

void MockCompletionClient::add_prompt_rule(std::string_view prompt, Reply reply) {
    add_fingerprint_rule(prompt_fingerprint(prompt), std::move(reply));
}

void MockCompletionClient::add_contains_rule(std::vector<std::string> needles, Reply reply) {
    std::lock_guard lock(mutex_);
    contains_.push_back({std::move(needles), std::move(reply)});
}

void MockCompletionClient::set_default(Reply reply) {
    std::lock_guard lock(mutex_);
    default_ = std::move(reply);
}

void MockCompletionClient::set_responder(Responder responder) {
    std::lock_guard lock(mutex_);
    responder_ = std::move(responder);
}

void MockCompletionClient::queue(Reply reply) {
    std::lock_guard lock(mutex_);
    queued_.push_back(std::move(reply));
}

void MockCompletionClient::load_script(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open " + path);
    load_script(in);
}

void MockCompletionClient::load_script(std::istream& in) {
    for_each_jsonl(in, [&](const nlohmann::json& j, std::size_t) {
        if (!j.is_object()) fail(ErrorCode::ParseError, "script rule must be an object");
        Reply reply;
        reply.text = j.value("response", std::string{});
        if (auto it = j.find("token_scores"); it != j.end() && !it->is_null()) {
            std::vector<TokenScore> scores;
            for (const auto& s : *it) scores.push_back(token_score_from_json(s));
            reply.token_scores = std::move(scores);
        }
        if (auto it = j.find("error"); it != j.end()) {
            if (*it != "unavailable") fail(ErrorCode::ParseError, "unknown scripted error " + it->dump());
            reply.unavailable = true;
        }
        if (j.contains("fingerprint")) {
            add_fingerprint_rule(j.at("fingerprint").get<std::string>(), std::move(reply));
        } else if (j.contains("contains")) {
            const auto& c = j.at("contains");
            std::vector<std::string> needles;
            if (c.is_string()) {
                needles.push_back(c.get<std::string>());
            } else {
                needles = c.get<std::vector<std::string>>();
            }
            add_contains_rule(std::move(needles), std::move(reply));
        } else if (j.value("default", false)) {
            set_default(std::move(reply));
        } else {
            fail(ErrorCode::ParseError, "script rule needs 'fingerprint', 'contains' or 'default'");
        }
    });
}

CompletionResult MockCompletionClient::complete(const CompletionRequest& request) const {
    ++calls_;
    std::optional<Reply> reply;
    Responder responder;
    {
        std::lock_guard lock(mutex_);
        prompts_.push_back(request.prompt);
        if (!queued_.empty()) {
            reply = std::move(queued_.front());
            queued_.erase(queued_.begin());
        } else if (auto it = by_fingerprint_.find(prompt_fingerprint(request.prompt)); it != by_fingerprint_.end()) {
            reply = it->second;
        } else {
            for (const auto& rule : contains_) {
                const bool all = std::all_of(rule.needles.begin(), rule.needles.end(), [&](const std::string& n) {
                    return request.prompt.find(n) != std::string::npos;
                });
                if (all) {
                    reply = rule.reply;
                    break;
                }
            }
        }
        responder = responder_;
    }
    if (!reply && responder) reply = responder(request);
    if (!reply) {
        std::lock_guard lock(mutex_);
        reply = default_;
    }
    if (!reply) fail(ErrorCode::BackendUnavailable, "mock client has no rule for prompt " + prompt_fingerprint(request.prompt));
    if (reply->unavailable) fail(ErrorCode::BackendUnavailable, "scripted transport failure");

    CompletionResult result{reply->text, std::nullopt};
    if (request.want_token_scores && supports_token_scores_) result.token_scores = reply->token_scores;
    return result;
}

std::vector<std::string> MockCompletionClient::prompts() const {
    std::lock_guard lock(mutex_);
    return prompts_;
}

HttpCompletionClient::HttpCompletionClient(HttpEndpoint endpoint, bool supports_token_scores)
    : endpoint_(std::move(endpoint)),
      supports_token_scores_(supports_token_scores),
      in_flight_(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(endpoint_.max_in_flight, 1, 1024))) {
    detail::split_url(endpoint_.url);
}

CompletionResult HttpCompletionClient::complete(const CompletionRequest& request) const {
    nlohmann::json body = {{"prompt", request.prompt},
                           {"max_tokens", request.max_tokens},
                           {"want_token_scores", request.want_token_scores && supports_token_scores_}};
    detail::SemaphoreGuard guard(in_flight_);
    return completion_result_from_json(detail::post_json(endpoint_.url, endpoint_.token, endpoint_.timeout_seconds, body));
}

}  // namespace llm4tag
