#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "llm4tag/core.hpp"
#include "llm4tag/encoder.hpp"

namespace llm4tag {

/// Similarity thresholds are inclusive lower bounds on cosine similarity.
/// Caps bound each meta-path's contribution to the candidate set.
struct GraphConfig {
    double delta_ct = 0.5;
    double delta_cc = 0.8;
    std::size_t cap_c2t = 15;
    std::size_t cap_c2c2t = 5;

    void validate() const;
};

enum class VertexKind { Content, Tag };

struct VertexRef {
    VertexKind kind;
    std::string id;

    friend bool operator==(const VertexRef&, const VertexRef&) = default;
};

struct ScoredTag {
    TagId tag;
    double score = 0.0;

    friend bool operator==(const ScoredTag&, const ScoredTag&) = default;
};

struct Candidate {
    TagId tag;
    double score = 0.0;
    Provenance provenance = Provenance::C2T;

    friend bool operator==(const Candidate&, const Candidate&) = default;
};

/// Ranked, deduplicated union of the meta-path recall results for one content.
struct CandidateSet {
    ContentId content;
    std::vector<Candidate> entries;

    [[nodiscard]] bool empty() const noexcept { return entries.empty(); }
    [[nodiscard]] std::size_t size() const noexcept { return entries.size(); }
    [[nodiscard]] bool contains(const TagId& tag) const noexcept;

    /// Candidate set from a plain id list (e.g. an SFT dataset row): order
    /// preserved, zero scores, provenance C2T.
    static CandidateSet from_ids(ContentId content, std::span<const TagId> ids);
};

enum class EdgeKind { Deterministic, SimilarityContentTag, SimilarityContentContent };

std::string_view to_string(EdgeKind kind) noexcept;

/// Canonical edge listing: `a` is always a content id; for content-content
/// edges a < b.
struct EdgeRecord {
    EdgeKind kind;
    std::string a;
    std::string b;
    std::optional<double> weight;

    friend bool operator==(const EdgeRecord&, const EdgeRecord&) = default;
};

struct SnapshotLoadOptions {
    /// Also require every above-threshold pair to carry its similarity
    /// edge (exhaustive rescan, O(V^2)).
    bool verify_completeness = true;
};

/// Undirected content/tag graph with deterministic (annotation) edges and
/// thresholded similarity edges, recalled through the C2T and C2C2T
/// meta-paths.
///
/// Not internally synchronized: callers provide exclusive access for
/// mutation and may share const access between readers.
class TagGraph {
public:
    explicit TagGraph(GraphConfig config = {});

    [[nodiscard]] const GraphConfig& config() const noexcept { return config_; }

    /// Adds a tag vertex and its similarity edges to every content with
    /// cosine >= delta_ct.
    VertexRef add_tag(const Tag& tag, const EncoderBackend& encoder);
    VertexRef add_tag(const TagId& id, Embedding embedding);

    /// Adds a content vertex with similarity edges to tags (>= delta_ct)
    /// and to other contents (>= delta_cc).
    VertexRef add_content(const Content& content, const EncoderBackend& encoder);
    VertexRef add_content(const ContentId& id, Embedding embedding);

    /// Idempotent. Content-content or tag-tag pairs raise InvalidEdge.
    void add_deterministic(const VertexRef& a, const VertexRef& b);
    void add_deterministic(const ContentId& content, const TagId& tag);

    /// All-or-nothing: every id is checked before any edge is written.
    void commit_tags(const ContentId& content, std::span<const TagId> tags);

    /// Drops a content vertex with all of its edges. Used to roll back a
    /// content whose processing failed.
    void remove_content(const ContentId& content);

    [[nodiscard]] std::vector<ScoredTag> recall_c2t(const ContentId& content) const;
    [[nodiscard]] std::vector<ScoredTag> recall_c2t(const ContentId& content, const GraphConfig& config) const;
    [[nodiscard]] std::vector<ScoredTag> recall_c2c2t(const ContentId& content) const;
    [[nodiscard]] std::vector<ScoredTag> recall_c2c2t(const ContentId& content, const GraphConfig& config) const;
    [[nodiscard]] CandidateSet recall(const ContentId& content) const;
    [[nodiscard]] CandidateSet recall(const ContentId& content, const GraphConfig& config) const;

    /// Match-based baseline: the top `n` tags by direct cosine similarity.
    [[nodiscard]] std::vector<ScoredTag> match_recall(const ContentId& content, std::size_t n) const;

    [[nodiscard]] bool has_content(const ContentId& id) const noexcept { return contents_.contains(id); }
    [[nodiscard]] bool has_tag(const TagId& id) const noexcept { return tags_.contains(id); }
    [[nodiscard]] const Embedding& content_embedding(const ContentId& id) const;
    [[nodiscard]] const Embedding& tag_embedding(const TagId& id) const;
    [[nodiscard]] std::size_t content_count() const noexcept { return contents_.size(); }
    [[nodiscard]] std::size_t tag_count() const noexcept { return tags_.size(); }
    [[nodiscard]] std::size_t vertex_count() const noexcept { return contents_.size() + tags_.size(); }
    [[nodiscard]] std::size_t edge_count() const noexcept;
    [[nodiscard]] std::size_t edge_count(EdgeKind kind) const noexcept;
    [[nodiscard]] std::optional<std::size_t> dim() const noexcept { return dim_; }

    /// Tags with a deterministic edge to `content`, in id order.
    [[nodiscard]] std::vector<TagId> deterministic_tags(const ContentId& content) const;

    [[nodiscard]] std::vector<EdgeRecord> edges() const;

    /// JSONL snapshot: tag vertices, content vertices, then edges, each
    /// group in id order, so equal graphs serialize to equal bytes.
    void save(std::ostream& out) const;
    [[nodiscard]] std::string snapshot() const;
    void save_file(const std::string& path) const;

    /// Rebuilds a graph from a snapshot, rejecting any record that breaks
    /// a vertex or edge invariant with InvalidSnapshot citing the line.
    static TagGraph load(std::istream& in, GraphConfig config, SnapshotLoadOptions options = {});
    static TagGraph load_file(const std::string& path, GraphConfig config, SnapshotLoadOptions options = {});

private:
    struct ContentNode {
        Embedding embedding;
        std::map<TagId, double> similar_tags;
        std::map<ContentId, double> similar_contents;
        std::set<TagId> deterministic_tags;
    };
    struct TagNode {
        Embedding embedding;
        std::set<ContentId> similar_contents;
        std::set<ContentId> deterministic_contents;
    };

    void check_dim(const Embedding& e);
    const ContentNode& content_node(const ContentId& id) const;

    GraphConfig config_;
    std::optional<std::size_t> dim_;
    std::map<ContentId, ContentNode> contents_;
    std::map<TagId, TagNode> tags_;
};

}  // namespace llm4tag
