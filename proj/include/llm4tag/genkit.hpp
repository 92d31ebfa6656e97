#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "llm4tag/completion.hpp"
#include "llm4tag/core.hpp"
#include "llm4tag/encoder.hpp"
#include "llm4tag/taggraph.hpp"

namespace llm4tag {

enum class TemplateKind { Basic, Retrieval, Confidence };

std::string_view to_string(TemplateKind kind) noexcept;

/// Scenario framing shared by the three prompt layouts. The layouts
/// themselves are fixed; `version` names the layout revision so exported
/// datasets can be traced back to the prompt text they were built from.
struct PromptTemplate {
    TemplateKind kind = TemplateKind::Basic;
    std::string scenario = "content tagging";
    std::string preamble;
    std::string version = "v1";

    void validate() const;
};

struct SampleEntry {
    Content content;
    std::vector<TagId> correct_tags;
    std::vector<TagId> incorrect_tags;
    Embedding embedding;
};

/// Annotated examples retrievable for in-context learning. Append-only;
/// safe for concurrent readers with serialized appends.
class SampleKnowledgeBase {
public:
    explicit SampleKnowledgeBase(std::shared_ptr<const EncoderBackend> encoder);

    void append(Content content, std::vector<TagId> correct, std::vector<TagId> incorrect);
    void load(const std::string& path);

    [[nodiscard]] std::size_t size() const;
    [[nodiscard]] std::vector<SampleEntry> entries() const;
    [[nodiscard]] const EncoderBackend& encoder() const noexcept { return *encoder_; }

private:
    std::shared_ptr<const EncoderBackend> encoder_;
    mutable std::shared_mutex mutex_;
    std::vector<SampleEntry> entries_;
};

enum class SegmentSource { Web, Domain };

std::string_view to_string(SegmentSource source) noexcept;

struct CorpusSegment {
    std::string text;
    SegmentSource source = SegmentSource::Domain;
    Embedding embedding;
};

/// Descriptive text segments (web pages, domain glossaries) for
/// retrieval-augmented prompts.
class CorpusKnowledgeBase {
public:
    static constexpr std::size_t kDefaultMaxSegmentChars = 512;

    explicit CorpusKnowledgeBase(std::shared_ptr<const EncoderBackend> encoder,
                                 std::size_t max_segment_chars = kDefaultMaxSegmentChars);

    /// Rejects blank or over-long segments with InvalidInput.
    void append(std::string text, SegmentSource source);
    void load(const std::string& path);

    [[nodiscard]] std::size_t size() const;
    [[nodiscard]] std::vector<CorpusSegment> segments() const;
    [[nodiscard]] std::size_t max_segment_chars() const noexcept { return max_segment_chars_; }
    [[nodiscard]] const EncoderBackend& encoder() const noexcept { return *encoder_; }

private:
    std::shared_ptr<const EncoderBackend> encoder_;
    std::size_t max_segment_chars_;
    mutable std::shared_mutex mutex_;
    std::vector<CorpusSegment> segments_;
};

/// Optional live search used alongside the pre-ingested corpus.
class WebSearchClient {
public:
    virtual ~WebSearchClient() = default;
    virtual std::vector<std::string> search(const std::string& query, std::size_t n) const = 0;
};

/// POST {"query": <text>, "n": <int>} -> {"results": [{"text": <text>}...]}.
class HttpWebSearchClient final : public WebSearchClient {
public:
    explicit HttpWebSearchClient(HttpEndpoint endpoint);
    std::vector<std::string> search(const std::string& query, std::size_t n) const override;

private:
    HttpEndpoint endpoint_;
};

/// Top-n samples by cosine to the content embedding; ties keep insertion order.
std::vector<SampleEntry> retrieve_icl(const SampleKnowledgeBase& skb, const Embedding& content, std::size_t n);
std::vector<SampleEntry> retrieve_icl(const SampleKnowledgeBase& skb, const Content& content, std::size_t n);

/// Top-n segments scored by the best cosine against the content or any
/// candidate tag embedding.
std::vector<CorpusSegment> retrieve_rag(std::span<const CorpusSegment> segments, const Embedding& content,
                                        std::span<const Embedding> candidate_tags, std::size_t n);
std::vector<CorpusSegment> retrieve_rag(const CorpusKnowledgeBase& ckb, const Embedding& content,
                                        std::span<const Embedding> candidate_tags, std::size_t n);
std::vector<CorpusSegment> retrieve_rag(const CorpusKnowledgeBase& ckb, const Content& content,
                                        const CandidateSet& candidates, const TagGraph& graph, std::size_t n);

struct RetrievedKnowledge {
    std::vector<SampleEntry> samples;
    std::vector<CorpusSegment> segments;
};

std::string render_basic(const PromptTemplate& tmpl, const TagRepository& repo, const Content& content,
                         const CandidateSet& candidates);
std::string render_retrieval(const PromptTemplate& tmpl, const TagRepository& repo, const Content& content,
                             const CandidateSet& candidates, const RetrievedKnowledge& knowledge);

/// Tag names from `TAG: <name>` lines; other lines are ignored. Returns
/// nullopt when the text has no such line at all. `TAG: NONE` stands for
/// an explicit empty answer.
std::optional<std::vector<std::string>> parse_tag_lines(std::string_view text);

/// `TAG: <name>` lines, newline-terminated.
std::string format_tag_lines(const TagRepository& repo, std::span<const TagId> tags);

struct GenerationOptions {
    int max_tokens = 256;
    /// Extra attempts after an unparseable reply.
    int retries = 1;
};

struct GenerationResult {
    std::vector<TagId> tags;
    std::vector<std::string> dropped;  ///< names outside the candidate set
    std::string raw_output;
    int attempts = 0;
};

/// Renders the retrieval prompt, queries the client and keeps the named
/// tags that resolve (by normalized name) to a candidate, in output order
/// with repeats removed. Unparseable output after all retries raises
/// GenerationFailed.
GenerationResult generate_tags(const CompletionClient& client, const PromptTemplate& tmpl, const TagRepository& repo,
                               const Content& content, const CandidateSet& candidates,
                               const RetrievedKnowledge& knowledge, const GenerationOptions& options = {});

struct SftExample {
    Content content;
    CandidateSet candidates;
    std::vector<TagId> gold;
};

struct SftRecord {
    std::string input;
    std::string target;

    friend bool operator==(const SftRecord&, const SftRecord&) = default;
};

/// One record per example: input is the basic prompt, target the gold tags
/// in the output line format. A gold tag outside its candidate set raises
/// InvalidRecord naming the example.
std::vector<SftRecord> export_sft(const PromptTemplate& tmpl, const TagRepository& repo,
                                  std::span<const SftExample> examples);
void write_sft(std::ostream& out, std::span<const SftRecord> records);
std::vector<SftRecord> read_sft(std::istream& in);

}  // namespace llm4tag
