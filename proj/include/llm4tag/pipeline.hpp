#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "llm4tag/calibrate.hpp"
#include "llm4tag/completion.hpp"
#include "llm4tag/config.hpp"
#include "llm4tag/core.hpp"
#include "llm4tag/encoder.hpp"
#include "llm4tag/genkit.hpp"
#include "llm4tag/taggraph.hpp"

namespace llm4tag {

/// Report flags attached to a content.
namespace flags {
inline constexpr const char* kNoCandidates = "NO_CANDIDATES";
inline constexpr const char* kNoTags = "NO_TAGS";
inline constexpr const char* kHallucinated = "HALLUCINATED_TAGS_DROPPED";
inline constexpr const char* kScoringFailed = "SCORING_FAILED";
inline constexpr const char* kWebSearchFailed = "WEB_SEARCH_FAILED";
inline constexpr const char* kFailed = "FAILED";
}  // namespace flags

struct StageTimings {
    double recall_ms = 0.0;
    double generation_ms = 0.0;
    double calibration_ms = 0.0;
    double total_ms = 0.0;
};

struct ContentReport {
    ContentId content;
    CandidateSet candidates;
    std::vector<TagId> generated;
    std::vector<std::string> dropped;
    std::vector<ScoredAssignment> pruned;
    std::vector<ScoringFailure> scoring_failures;
    std::vector<TagAssignment> assignments;
    std::vector<std::string> flags;
    std::optional<ErrorCode> error_code;
    std::string error;
    StageTimings timings;

    [[nodiscard]] bool failed() const noexcept { return error_code.has_value(); }
    [[nodiscard]] bool has_flag(std::string_view flag) const;
};

nlohmann::json to_json(const ContentReport& entry, bool include_timings = false);

struct TaggingReport {
    std::vector<ContentReport> entries;

    [[nodiscard]] std::size_t failed_count() const;
    [[nodiscard]] std::size_t committed_edge_count() const;
    /// Entries in input order plus aggregate counters. Timings are left
    /// out unless asked for, so equal runs serialize identically.
    [[nodiscard]] nlohmann::json to_json(bool include_timings = false) const;
};

/// Historical annotation used to seed deterministic edges.
struct Annotation {
    ContentId content;
    std::vector<TagId> tags;
};

std::vector<Annotation> load_annotations(const std::string& path);

/// Recall -> generation -> calibration -> feedback, over one shared graph.
///
/// Graph access follows a shared-reader / exclusive-writer discipline:
/// recall and snapshot reads take a shared lock, vertex insertion and
/// feedback commits take an exclusive one. LLM and encoder calls run
/// outside the lock.
class Pipeline {
public:
    Pipeline(PipelineConfig config, std::shared_ptr<const EncoderBackend> encoder,
             std::shared_ptr<const CompletionClient> client);

    /// Builds encoder and client from the configuration and loads any
    /// configured knowledge bases.
    static std::unique_ptr<Pipeline> from_config(PipelineConfig config);

    [[nodiscard]] const PipelineConfig& config() const noexcept { return config_; }
    [[nodiscard]] const TagRepository& repository() const noexcept { return repo_; }
    [[nodiscard]] const EncoderBackend& encoder() const noexcept { return *encoder_; }
    [[nodiscard]] SampleKnowledgeBase& samples() noexcept { return samples_; }
    [[nodiscard]] CorpusKnowledgeBase& corpus() noexcept { return corpus_; }
    void set_web_search(std::shared_ptr<const WebSearchClient> search) { search_ = std::move(search); }

    /// Adds tags to the repository and the graph. Returns the count added.
    std::size_t ingest_tags(std::span<const Tag> tags);
    std::size_t ingest_repository(const std::string& path);

    /// Adds already-tagged historical contents and their annotations.
    std::size_t ingest_contents(std::span<const Content> contents, std::span<const Annotation> annotations = {});

    /// Runs the whole chain for one content. Never throws for per-content
    /// failures: they are recorded in the entry and the graph is restored
    /// to its state before the call.
    ContentReport tag_content(const Content& content);

    /// Tags `contents` with up to `config.parallelism` workers; entries come
    /// back in input order.
    TaggingReport run_batch(std::span<const Content> contents);

    [[nodiscard]] CandidateSet candidates(const ContentId& content) const;
    [[nodiscard]] double confidence(const Content& content, const TagId& tag) const;

    [[nodiscard]] std::string snapshot() const;
    void save_snapshot(const std::string& path) const;
    /// Replaces the graph with a validated snapshot. Every tag vertex must
    /// exist in the repository.
    void load_snapshot(const std::string& path);
    void load_snapshot_text(const std::string& text);

    [[nodiscard]] std::size_t content_count() const;
    [[nodiscard]] std::size_t edge_count() const;
    [[nodiscard]] std::vector<TagId> deterministic_tags(const ContentId& content) const;

private:
    RetrievedKnowledge gather_knowledge(const Content& content, const Embedding& embedding,
                                        const CandidateSet& candidates, ContentReport& entry) const;
    void install_graph(TagGraph graph);

    PipelineConfig config_;
    std::shared_ptr<const EncoderBackend> encoder_;
    std::shared_ptr<const CompletionClient> client_;
    std::shared_ptr<const WebSearchClient> search_;
    TagRepository repo_;
    SampleKnowledgeBase samples_;
    CorpusKnowledgeBase corpus_;

    mutable std::shared_mutex graph_mutex_;
    TagGraph graph_;
};

}  // namespace llm4tag
