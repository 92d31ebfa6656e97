#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "llm4tag/encoder.hpp"

namespace llm4tag {

struct TokenAlternative {
    std::string token;
    double logprob = 0.0;

    friend bool operator==(const TokenAlternative&, const TokenAlternative&) = default;
};

/// Scores reported for one generated position.
struct TokenScore {
    std::string token;
    double logprob = 0.0;
    std::vector<TokenAlternative> top_alternatives;

    friend bool operator==(const TokenScore&, const TokenScore&) = default;
};

struct CompletionRequest {
    std::string prompt;
    int max_tokens = 256;
    bool want_token_scores = false;
};

struct CompletionResult {
    std::string text;
    std::optional<std::vector<TokenScore>> token_scores;
};

nlohmann::json to_json(const TokenScore& score);
TokenScore token_score_from_json(const nlohmann::json& j);

class CompletionClient {
public:
    virtual ~CompletionClient() = default;

    /// Throws BackendUnavailable on transport failure.
    virtual CompletionResult complete(const CompletionRequest& request) const = 0;

    [[nodiscard]] virtual std::string identity() const = 0;
    [[nodiscard]] virtual bool supports_token_scores() const noexcept = 0;
};

/// Stable fingerprint used to key scripted responses: 16 hex digits of
/// 64-bit FNV-1a over the prompt bytes.
std::string prompt_fingerprint(std::string_view prompt);

/// Deterministic scripted client for tests and offline runs.
///
/// Rules are tried in this order: exact fingerprint, then `contains`
/// rules in insertion order (every listed substring must occur in the
/// prompt), then the responder callback, then the default rule. A prompt
/// nothing matches raises BackendUnavailable.
///
/// Script file, one JSON object per line:
///   {"fingerprint": "<hex>", "response": "TAG: x"}
///   {"contains": ["substring", ...], "response": "...", "token_scores": [...]}
///   {"default": true, "response": "..."}
/// A rule may carry `"error": "unavailable"` to simulate a transport failure.
class MockCompletionClient final : public CompletionClient {
public:
    struct Reply {
        std::string text;
        std::optional<std::vector<TokenScore>> token_scores;
        bool unavailable = false;
    };
    using Responder = std::function<std::optional<Reply>(const CompletionRequest&)>;

    explicit MockCompletionClient(bool supports_token_scores = true);

    void add_fingerprint_rule(std::string fingerprint, Reply reply);
    void add_prompt_rule(std::string_view prompt, Reply reply);
    void add_contains_rule(std::vector<std::string> needles, Reply reply);
    void set_default(Reply reply);
    void set_responder(Responder responder);

    /// Queued replies are consumed first, one per call, regardless of prompt.
    void queue(Reply reply);

    void load_script(const std::string& path);
    void load_script(std::istream& in);

    CompletionResult complete(const CompletionRequest& request) const override;
    [[nodiscard]] std::string identity() const override { return "mock/1"; }
    [[nodiscard]] bool supports_token_scores() const noexcept override { return supports_token_scores_; }

    [[nodiscard]] std::size_t call_count() const noexcept { return calls_.load(); }
    [[nodiscard]] std::vector<std::string> prompts() const;

private:
    struct ContainsRule {
        std::vector<std::string> needles;
        Reply reply;
    };

    bool supports_token_scores_;
    mutable std::mutex mutex_;
    std::unordered_map<std::string, Reply> by_fingerprint_;
    std::vector<ContainsRule> contains_;
    std::optional<Reply> default_;
    Responder responder_;
    mutable std::vector<Reply> queued_;
    mutable std::vector<std::string> prompts_;
    mutable std::atomic<std::size_t> calls_{0};
};

/// Remote completion service: POST {"prompt","max_tokens","want_token_scores"}
/// -> {"text", "token_scores"?}.
class HttpCompletionClient final : public CompletionClient {
public:
    HttpCompletionClient(HttpEndpoint endpoint, bool supports_token_scores = true);

    CompletionResult complete(const CompletionRequest& request) const override;
    [[nodiscard]] std::string identity() const override { return "http/1 " + endpoint_.url; }
    [[nodiscard]] bool supports_token_scores() const noexcept override { return supports_token_scores_; }

private:
    HttpEndpoint endpoint_;
    bool supports_token_scores_;
    mutable std::counting_semaphore<1024> in_flight_;
};

CompletionResult completion_result_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CompletionResult& result);

}  // namespace llm4tag
