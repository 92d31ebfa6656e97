#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>

#include "llm4tag/calibrate.hpp"
#include "llm4tag/completion.hpp"
#include "llm4tag/encoder.hpp"
#include "llm4tag/genkit.hpp"
#include "llm4tag/taggraph.hpp"

namespace llm4tag {

/// Everything a pipeline run needs. Loaded from a `key = value` file
/// (`#` starts a comment); keys mirror the field paths below, e.g.
/// `graph.delta_ct = 0.5` or `completion.backend = http`.
struct PipelineConfig {
    GraphConfig graph;
    CalibrationConfig calibration;
    std::size_t icl_n = 3;
    std::size_t rag_n = 3;
    std::size_t parallelism = 1;

    std::string encoder_backend = "hashing";  ///< hashing | http
    std::size_t encoder_dim = HashingEncoder::kDefaultDim;
    HttpEndpoint encoder_endpoint{"", "", 30, 8};

    std::string completion_backend = "mock";  ///< mock | http
    std::string completion_script;            ///< mock script path
    HttpEndpoint completion_endpoint{"", "", 60, 4};
    bool completion_token_scores = true;
    GenerationOptions generation;

    PromptTemplate prompt;

    std::string samples_path;
    std::string corpus_path;
    std::size_t max_segment_chars = CorpusKnowledgeBase::kDefaultMaxSegmentChars;
    HttpEndpoint search_endpoint{"", "", 30, 4};  ///< live web search, off while url is empty

    bool report_timings = false;

    void validate() const;
};

/// Unknown keys and malformed values raise ParseError citing the line.
PipelineConfig parse_config(std::istream& in);
PipelineConfig load_config_file(const std::string& path);

/// Applies LLM4TAG_ENCODER_URL, LLM4TAG_ENCODER_TOKEN, LLM4TAG_COMPLETION_URL,
/// LLM4TAG_COMPLETION_TOKEN, LLM4TAG_SEARCH_URL and LLM4TAG_SEARCH_TOKEN.
/// `getenv` is injectable for tests.
void apply_env_overrides(PipelineConfig& config,
                         const std::function<const char*(const char*)>& getenv = nullptr);

std::shared_ptr<const EncoderBackend> make_encoder(const PipelineConfig& config);
std::shared_ptr<const CompletionClient> make_completion_client(const PipelineConfig& config);

}  // namespace llm4tag
