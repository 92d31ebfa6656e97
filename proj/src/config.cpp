#include "llm4tag/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>

#include "llm4tag/error.hpp"
#include "llm4tag/util.hpp"

namespace llm4tag {

void PipelineConfig::validate() const {
    graph.validate();
    calibration.validate();
    if (parallelism < 1) fail(ErrorCode::InvalidInput, "parallelism must be >= 1");
    if (encoder_backend != "hashing" && encoder_backend != "http")
        fail(ErrorCode::InvalidInput, "encoder.backend must be 'hashing' or 'http'");
    if (encoder_dim < 1) fail(ErrorCode::InvalidInput, "encoder.dim must be >= 1");
    if (encoder_backend == "http" && encoder_endpoint.url.empty())
        fail(ErrorCode::InvalidInput, "encoder.url is required for the http encoder");
    if (completion_backend != "mock" && completion_backend != "http")
        fail(ErrorCode::InvalidInput, "completion.backend must be 'mock' or 'http'");
    if (completion_backend == "http" && completion_endpoint.url.empty())
        fail(ErrorCode::InvalidInput, "completion.url is required for the http completion backend");
    if (generation.max_tokens < 1) fail(ErrorCode::InvalidInput, "completion.max_tokens must be >= 1");
    if (generation.retries < 0) fail(ErrorCode::InvalidInput, "generation.retries must be >= 0");
    if (max_segment_chars < 1) fail(ErrorCode::InvalidInput, "knowledge.max_segment_chars must be >= 1");
    prompt.validate();
}

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const char* first = value.data();
    const char* last = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last) fail(ErrorCode::ParseError, "bad value for " + key + ": '" + value + "'");
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    const std::string v = normalize_text(value);
    if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
    if (v == "false" || v == "no" || v == "0" || v == "off") return false;
    fail(ErrorCode::ParseError, "bad boolean for " + key + ": '" + value + "'");
}

using Setter = std::function<void(PipelineConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"graph.delta_ct", [](auto& c, auto& k, auto& v) { c.graph.delta_ct = parse_number<double>(k, v); }},
        {"graph.delta_cc", [](auto& c, auto& k, auto& v) { c.graph.delta_cc = parse_number<double>(k, v); }},
        {"graph.cap_c2t", [](auto& c, auto& k, auto& v) { c.graph.cap_c2t = parse_number<std::size_t>(k, v); }},
        {"graph.cap_c2c2t", [](auto& c, auto& k, auto& v) { c.graph.cap_c2c2t = parse_number<std::size_t>(k, v); }},
        {"calibration.threshold", [](auto& c, auto& k, auto& v) { c.calibration.threshold = parse_number<double>(k, v); }},
        {"icl_n", [](auto& c, auto& k, auto& v) { c.icl_n = parse_number<std::size_t>(k, v); }},
        {"rag_n", [](auto& c, auto& k, auto& v) { c.rag_n = parse_number<std::size_t>(k, v); }},
        {"parallelism", [](auto& c, auto& k, auto& v) { c.parallelism = parse_number<std::size_t>(k, v); }},
        {"encoder.backend", [](auto& c, auto&, auto& v) { c.encoder_backend = v; }},
        {"encoder.dim", [](auto& c, auto& k, auto& v) { c.encoder_dim = parse_number<std::size_t>(k, v); }},
        {"encoder.url", [](auto& c, auto&, auto& v) { c.encoder_endpoint.url = v; }},
        {"encoder.token", [](auto& c, auto&, auto& v) { c.encoder_endpoint.token = v; }},
        {"encoder.timeout_seconds", [](auto& c, auto& k, auto& v) { c.encoder_endpoint.timeout_seconds = parse_number<int>(k, v); }},
        {"encoder.max_in_flight", [](auto& c, auto& k, auto& v) { c.encoder_endpoint.max_in_flight = parse_number<std::size_t>(k, v); }},
        {"completion.backend", [](auto& c, auto&, auto& v) { c.completion_backend = v; }},
        {"completion.script", [](auto& c, auto&, auto& v) { c.completion_script = v; }},
        {"completion.url", [](auto& c, auto&, auto& v) { c.completion_endpoint.url = v; }},
        {"completion.token", [](auto& c, auto&, auto& v) { c.completion_endpoint.token = v; }},
        {"completion.timeout_seconds", [](auto& c, auto& k, auto& v) { c.completion_endpoint.timeout_seconds = parse_number<int>(k, v); }},
        {"completion.max_in_flight", [](auto& c, auto& k, auto& v) { c.completion_endpoint.max_in_flight = parse_number<std::size_t>(k, v); }},
        {"completion.token_scores", [](auto& c, auto& k, auto& v) { c.completion_token_scores = parse_bool(k, v); }},
        {"completion.max_tokens", [](auto& c, auto& k, auto& v) { c.generation.max_tokens = parse_number<int>(k, v); }},
        {"generation.retries", [](auto& c, auto& k, auto& v) { c.generation.retries = parse_number<int>(k, v); }},
        {"template.scenario", [](auto& c, auto&, auto& v) { c.prompt.scenario = v; }},
        {"template.preamble", [](auto& c, auto&, auto& v) { c.prompt.preamble = v; }},
        {"template.version", [](auto& c, auto&, auto& v) { c.prompt.version = v; }},
        {"knowledge.samples", [](auto& c, auto&, auto& v) { c.samples_path = v; }},
        {"knowledge.corpus", [](auto& c, auto&, auto& v) { c.corpus_path = v; }},
        {"knowledge.max_segment_chars", [](auto& c, auto& k, auto& v) { c.max_segment_chars = parse_number<std::size_t>(k, v); }},
        {"search.url", [](auto& c, auto&, auto& v) { c.search_endpoint.url = v; }},
        {"search.token", [](auto& c, auto&, auto& v) { c.search_endpoint.token = v; }},
        {"report.timings", [](auto& c, auto& k, auto& v) { c.report_timings = parse_bool(k, v); }},
    };
    return table;
}

}  // namespace

PipelineConfig parse_config(std::istream& in) {
    PipelineConfig config;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        const std::string where = "config line " + std::to_string(line_no) + ": ";
        if (eq == std::string::npos) fail(ErrorCode::ParseError, where + "expected 'key = value'");
        const std::string key = trim(std::string_view(t).substr(0, eq));
        const std::string value = trim(std::string_view(t).substr(eq + 1));
        auto it = setters().find(key);
        if (it == setters().end()) fail(ErrorCode::ParseError, where + "unknown key '" + key + "'");
        try {
            it->second(config, key, value);
        } catch (const Error& e) {
            fail(ErrorCode::ParseError, where + e.message());
        }
    }
    return config;
}

PipelineConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoError, "cannot open " + path);
    return parse_config(in);
}

void apply_env_overrides(PipelineConfig& config, const std::function<const char*(const char*)>& getenv) {
    auto get = [&](const char* name) -> const char* { return getenv ? getenv(name) : std::getenv(name); };
    auto apply = [&](const char* name, std::string& field) {
        if (const char* v = get(name); v && *v) field = v;
    };
    apply("LLM4TAG_ENCODER_URL", config.encoder_endpoint.url);
    apply("LLM4TAG_ENCODER_TOKEN", config.encoder_endpoint.token);
    apply("LLM4TAG_COMPLETION_URL", config.completion_endpoint.url);
    apply("LLM4TAG_COMPLETION_TOKEN", config.completion_endpoint.token);
    apply("LLM4TAG_SEARCH_URL", config.search_endpoint.url);
    apply("LLM4TAG_SEARCH_TOKEN", config.search_endpoint.token);
}

std::shared_ptr<const EncoderBackend> make_encoder(const PipelineConfig& config) {
    if (config.encoder_backend == "http") return std::make_shared<HttpEncoder>(config.encoder_endpoint, config.encoder_dim);
    return std::make_shared<HashingEncoder>(config.encoder_dim);
}

std::shared_ptr<const CompletionClient> make_completion_client(const PipelineConfig& config) {
    if (config.completion_backend == "http")
        return std::make_shared<HttpCompletionClient>(config.completion_endpoint, config.completion_token_scores);
    auto mock = std::make_shared<MockCompletionClient>(config.completion_token_scores);
    if (!config.completion_script.empty()) mock->load_script(config.completion_script);
    return mock;
}

}  // namespace llm4tag
