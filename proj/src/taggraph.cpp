#include "llm4tag/taggraph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "llm4tag/error.hpp"
#include "llm4tag/jsonl.hpp"

namespace llm4tag {

void GraphConfig::validate() const {
    auto in_range = [](double d) { return d > -1.0 && d <= 1.0; };
    if (!in_range(delta_ct) || !in_range(delta_cc))
        fail(ErrorCode::InvalidInput, "similarity thresholds must lie in (-1, 1]");
    if (cap_c2t < 1 || cap_c2c2t < 1) fail(ErrorCode::InvalidInput, "recall caps must be >= 1");
}

bool CandidateSet::contains(const TagId& tag) const noexcept {
    return std::any_of(entries.begin(), entries.end(), [&](const Candidate& c) { return c.tag == tag; });
}

CandidateSet CandidateSet::from_ids(ContentId content, std::span<const TagId> ids) {
    CandidateSet set{std::move(content), {}};
    for (const auto& id : ids) {
        if (set.contains(id)) fail(ErrorCode::InvalidInput, "duplicate candidate '" + id.str() + "'");
        set.entries.push_back({id, 0.0, Provenance::C2T});
    }
    return set;
}

std::string_view to_string(EdgeKind kind) noexcept {
    switch (kind) {
        case EdgeKind::Deterministic: return "deterministic";
        case EdgeKind::SimilarityContentTag: return "similarity_ct";
        case EdgeKind::SimilarityContentContent: return "similarity_cc";
    }
    return "deterministic";
}

namespace {

int provenance_rank(Provenance p) {
    switch (p) {
        case Provenance::Both: return 0;
        case Provenance::C2T: return 1;
        case Provenance::C2C2T: return 2;
        case Provenance::Feedback: return 3;
    }
    return 3;
}

void rank_and_truncate(std::vector<ScoredTag>& tags, std::size_t cap) {
    std::sort(tags.begin(), tags.end(), [](const ScoredTag& x, const ScoredTag& y) {
        if (x.score != y.score) return x.score > y.score;
        return x.tag < y.tag;
    });
    if (tags.size() > cap) tags.resize(cap);
}

}  // namespace

TagGraph::TagGraph(GraphConfig config) : config_(config) { config_.validate(); }

void TagGraph::check_dim(const Embedding& e) {
    if (e.empty()) fail(ErrorCode::InvalidInput, "vertex embedding must be set");
    if (dim_ && *dim_ != e.dim())
        fail(ErrorCode::InvalidInput,
             "embedding dimension " + std::to_string(e.dim()) + " does not match graph dimension " + std::to_string(*dim_));
}

VertexRef TagGraph::add_tag(const Tag& tag, const EncoderBackend& encoder) {
    tag.validate();
    if (tags_.contains(tag.id)) fail(ErrorCode::DuplicateVertex, "tag vertex '" + tag.id.str() + "' exists");
    return add_tag(tag.id, encoder.embed(canonical_text(tag)));
}

VertexRef TagGraph::add_tag(const TagId& id, Embedding embedding) {
    if (id.empty()) fail(ErrorCode::InvalidInput, "tag id must be non-empty");
    if (tags_.contains(id)) fail(ErrorCode::DuplicateVertex, "tag vertex '" + id.str() + "' exists");
    check_dim(embedding);
    dim_ = embedding.dim();

    TagNode node{std::move(embedding), {}, {}};
    for (auto& [cid, content] : contents_) {
        const double w = cosine(content.embedding, node.embedding);
        if (w >= config_.delta_ct) {
            content.similar_tags.emplace(id, w);
            node.similar_contents.insert(cid);
        }
    }
    tags_.emplace(id, std::move(node));
    return {VertexKind::Tag, id.str()};
}

VertexRef TagGraph::add_content(const Content& content, const EncoderBackend& encoder) {
    content.validate();
    if (contents_.contains(content.id))
        fail(ErrorCode::DuplicateVertex, "content vertex '" + content.id.str() + "' exists");
    return add_content(content.id, encoder.embed(canonical_text(content)));
}

VertexRef TagGraph::add_content(const ContentId& id, Embedding embedding) {
    if (id.empty()) fail(ErrorCode::InvalidInput, "content id must be non-empty");
    if (contents_.contains(id)) fail(ErrorCode::DuplicateVertex, "content vertex '" + id.str() + "' exists");
    check_dim(embedding);
    dim_ = embedding.dim();

    ContentNode node{std::move(embedding), {}, {}, {}};
    for (auto& [tid, tag] : tags_) {
        const double w = cosine(node.embedding, tag.embedding);
        if (w >= config_.delta_ct) {
            node.similar_tags.emplace(tid, w);
            tag.similar_contents.insert(id);
        }
    }
    for (auto& [cid, other] : contents_) {
        const double w = cosine(node.embedding, other.embedding);
        if (w >= config_.delta_cc) {
            node.similar_contents.emplace(cid, w);
            other.similar_contents.emplace(id, w);
        }
    }
    contents_.emplace(id, std::move(node));
    return {VertexKind::Content, id.str()};
}

void TagGraph::add_deterministic(const VertexRef& a, const VertexRef& b) {
    if (a.kind == b.kind)
        fail(ErrorCode::InvalidEdge, "deterministic edges connect a content and a tag, got '" + a.id + "' and '" + b.id + "'");
    const VertexRef& c = a.kind == VertexKind::Content ? a : b;
    const VertexRef& t = a.kind == VertexKind::Content ? b : a;
    add_deterministic(ContentId(c.id), TagId(t.id));
}

void TagGraph::add_deterministic(const ContentId& content, const TagId& tag) {
    auto cit = contents_.find(content);
    if (cit == contents_.end()) fail(ErrorCode::UnknownVertex, "unknown content '" + content.str() + "'");
    auto tit = tags_.find(tag);
    if (tit == tags_.end()) fail(ErrorCode::UnknownVertex, "unknown tag '" + tag.str() + "'");
    cit->second.deterministic_tags.insert(tag);
    tit->second.deterministic_contents.insert(content);
}

void TagGraph::commit_tags(const ContentId& content, std::span<const TagId> tags) {
    if (!contents_.contains(content)) fail(ErrorCode::UnknownVertex, "unknown content '" + content.str() + "'");
    for (const auto& t : tags)
        if (!tags_.contains(t)) fail(ErrorCode::UnknownVertex, "unknown tag '" + t.str() + "'");
    for (const auto& t : tags) add_deterministic(content, t);
}

void TagGraph::remove_content(const ContentId& content) {
    auto it = contents_.find(content);
    if (it == contents_.end()) fail(ErrorCode::UnknownVertex, "unknown content '" + content.str() + "'");
    for (const auto& [tid, w] : it->second.similar_tags) tags_.at(tid).similar_contents.erase(content);
    for (const auto& tid : it->second.deterministic_tags) tags_.at(tid).deterministic_contents.erase(content);
    for (const auto& [cid, w] : it->second.similar_contents) contents_.at(cid).similar_contents.erase(content);
    contents_.erase(it);
}

const TagGraph::ContentNode& TagGraph::content_node(const ContentId& id) const {
    auto it = contents_.find(id);
    if (it == contents_.end()) fail(ErrorCode::UnknownVertex, "unknown content '" + id.str() + "'");
    return it->second;
}

std::vector<ScoredTag> TagGraph::recall_c2t(const ContentId& content) const { return recall_c2t(content, config_); }

std::vector<ScoredTag> TagGraph::recall_c2t(const ContentId& content, const GraphConfig& config) const {
    const ContentNode& node = content_node(content);
    std::vector<ScoredTag> out;
    out.reserve(node.similar_tags.size());
    for (const auto& [tid, w] : node.similar_tags) out.push_back({tid, w});
    rank_and_truncate(out, config.cap_c2t);
    return out;
}

std::vector<ScoredTag> TagGraph::recall_c2c2t(const ContentId& content) const {
    return recall_c2c2t(content, config_);
}

std::vector<ScoredTag> TagGraph::recall_c2c2t(const ContentId& content, const GraphConfig& config) const {
    const ContentNode& node = content_node(content);
    // A tag reached through several similar contents keeps its best first hop.
    std::map<TagId, double> best;
    for (const auto& [neighbor, w] : node.similar_contents) {
        for (const auto& tid : contents_.at(neighbor).deterministic_tags) {
            auto [it, inserted] = best.emplace(tid, w);
            if (!inserted && w > it->second) it->second = w;
        }
    }
    std::vector<ScoredTag> out;
    out.reserve(best.size());
    for (const auto& [tid, w] : best) out.push_back({tid, w});
    rank_and_truncate(out, config.cap_c2c2t);
    return out;
}

CandidateSet TagGraph::recall(const ContentId& content) const { return recall(content, config_); }

CandidateSet TagGraph::recall(const ContentId& content, const GraphConfig& config) const {
    std::map<TagId, Candidate> merged;
    for (auto& s : recall_c2t(content, config)) merged.emplace(s.tag, Candidate{s.tag, s.score, Provenance::C2T});
    for (auto& s : recall_c2c2t(content, config)) {
        auto [it, inserted] = merged.emplace(s.tag, Candidate{s.tag, s.score, Provenance::C2C2T});
        if (!inserted) {
            it->second.provenance = Provenance::Both;
            it->second.score = std::max(it->second.score, s.score);
        }
    }
    CandidateSet set{content, {}};
    set.entries.reserve(merged.size());
    for (auto& [tid, c] : merged) set.entries.push_back(std::move(c));
    std::sort(set.entries.begin(), set.entries.end(), [](const Candidate& x, const Candidate& y) {
        if (x.score != y.score) return x.score > y.score;
        if (x.provenance != y.provenance) return provenance_rank(x.provenance) < provenance_rank(y.provenance);
        return x.tag < y.tag;
    });
    return set;
}

std::vector<ScoredTag> TagGraph::match_recall(const ContentId& content, std::size_t n) const {
    const ContentNode& node = content_node(content);
    std::vector<ScoredTag> out;
    out.reserve(tags_.size());
    for (const auto& [tid, tag] : tags_) out.push_back({tid, cosine(node.embedding, tag.embedding)});
    const std::size_t keep = std::min(n, out.size());
    std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(keep), out.end(),
                      [](const ScoredTag& x, const ScoredTag& y) {
                          if (x.score != y.score) return x.score > y.score;
                          return x.tag < y.tag;
                      });
    out.resize(keep);
    return out;
}

const Embedding& TagGraph::content_embedding(const ContentId& id) const { return content_node(id).embedding; }

const Embedding& TagGraph::tag_embedding(const TagId& id) const {
    auto it = tags_.find(id);
    if (it == tags_.end()) fail(ErrorCode::UnknownVertex, "unknown tag '" + id.str() + "'");
    return it->second.embedding;
}

std::size_t TagGraph::edge_count(EdgeKind kind) const noexcept {
    std::size_t n = 0;
    for (const auto& [id, node] : contents_) {
        switch (kind) {
            case EdgeKind::Deterministic: n += node.deterministic_tags.size(); break;
            case EdgeKind::SimilarityContentTag: n += node.similar_tags.size(); break;
            case EdgeKind::SimilarityContentContent: n += node.similar_contents.size(); break;
        }
    }
    return kind == EdgeKind::SimilarityContentContent ? n / 2 : n;
}

std::size_t TagGraph::edge_count() const noexcept {
    return edge_count(EdgeKind::Deterministic) + edge_count(EdgeKind::SimilarityContentTag) +
           edge_count(EdgeKind::SimilarityContentContent);
}

std::vector<TagId> TagGraph::deterministic_tags(const ContentId& content) const {
    const auto& tags = content_node(content).deterministic_tags;
    return {tags.begin(), tags.end()};
}

std::vector<EdgeRecord> TagGraph::edges() const {
    std::vector<EdgeRecord> out;
    out.reserve(edge_count());
    for (const auto& [cid, node] : contents_)
        for (const auto& tid : node.deterministic_tags)
            out.push_back({EdgeKind::Deterministic, cid.str(), tid.str(), std::nullopt});
    for (const auto& [cid, node] : contents_)
        for (const auto& [tid, w] : node.similar_tags) out.push_back({EdgeKind::SimilarityContentTag, cid.str(), tid.str(), w});
    for (const auto& [cid, node] : contents_)
        for (const auto& [other, w] : node.similar_contents)
            if (cid < other) out.push_back({EdgeKind::SimilarityContentContent, cid.str(), other.str(), w});
    return out;
}

void TagGraph::save(std::ostream& out) const {
    auto vertex_line = [&](std::string_view kind, const std::string& id, const Embedding& e) {
        json j = {{"kind", kind}, {"id", id}, {"embedding", std::vector<double>(e.values().begin(), e.values().end())}};
        out << dump_line(j) << '\n';
    };
    for (const auto& [tid, node] : tags_) vertex_line("tag", tid.str(), node.embedding);
    for (const auto& [cid, node] : contents_) vertex_line("content", cid.str(), node.embedding);
    for (const auto& e : edges()) {
        json j = {{"kind", to_string(e.kind)}, {"a", e.a}, {"b", e.b}};
        if (e.weight) j["weight"] = *e.weight;
        out << dump_line(j) << '\n';
    }
}

std::string TagGraph::snapshot() const {
    std::ostringstream out;
    save(out);
    return out.str();
}

void TagGraph::save_file(const std::string& path) const { write_file_atomic(path, snapshot()); }

namespace {

constexpr double kWeightTolerance = 1e-9;

std::string string_field(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string() || it->get_ref<const std::string&>().empty())
        fail(ErrorCode::InvalidSnapshot, std::string("missing or empty string field '") + key + "'");
    return it->get<std::string>();
}

}  // namespace

TagGraph TagGraph::load(std::istream& in, GraphConfig config, SnapshotLoadOptions options) {
    TagGraph g(config);
    bool seen_edge = false;

    auto check_weight = [&](const Embedding& x, const Embedding& y, const json& j, double threshold) {
        auto it = j.find("weight");
        if (it == j.end() || !it->is_number()) fail(ErrorCode::InvalidSnapshot, "similarity edge needs a numeric weight");
        const double w = it->get<double>();
        if (!std::isfinite(w) || w < -1.0 || w > 1.0) fail(ErrorCode::InvalidSnapshot, "weight outside [-1, 1]");
        const double expected = cosine(x, y);
        if (std::abs(w - expected) > kWeightTolerance)
            fail(ErrorCode::InvalidSnapshot,
                 "weight " + std::to_string(w) + " disagrees with endpoint cosine " + std::to_string(expected));
        if (w < threshold)
            fail(ErrorCode::InvalidSnapshot,
                 "weight " + std::to_string(w) + " is below the threshold " + std::to_string(threshold));
        return w;
    };

    std::map<ContentId, std::size_t> content_line;
    try {
        for_each_jsonl(in, [&](const json& j, std::size_t line_no) {
            if (!j.is_object()) fail(ErrorCode::InvalidSnapshot, "record must be a JSON object");
            const std::string kind = string_field(j, "kind");
            if (kind == "tag" || kind == "content") {
                if (seen_edge) fail(ErrorCode::InvalidSnapshot, "vertex record after edge records");
                const std::string id = string_field(j, "id");
                auto it = j.find("embedding");
                if (it == j.end() || !it->is_array()) fail(ErrorCode::InvalidSnapshot, "vertex needs an embedding array");
                std::vector<double> values;
                values.reserve(it->size());
                for (const auto& x : *it) {
                    if (!x.is_number()) fail(ErrorCode::InvalidSnapshot, "embedding entries must be numbers");
                    values.push_back(x.get<double>());
                }
                Embedding e;
                try {
                    e = Embedding(std::move(values));
                    g.check_dim(e);
                } catch (const Error& err) {
                    fail(ErrorCode::InvalidSnapshot, err.message());
                }
                g.dim_ = e.dim();
                if (kind == "tag") {
                    TagId tid(id);
                    if (g.tags_.contains(tid)) fail(ErrorCode::InvalidSnapshot, "duplicate tag vertex '" + id + "'");
                    g.tags_.emplace(std::move(tid), TagNode{std::move(e), {}, {}});
                } else {
                    ContentId cid(id);
                    if (g.contents_.contains(cid)) fail(ErrorCode::InvalidSnapshot, "duplicate content vertex '" + id + "'");
                    content_line.emplace(cid, line_no);
                    g.contents_.emplace(std::move(cid), ContentNode{std::move(e), {}, {}, {}});
                }
                return;
            }

            seen_edge = true;
            const std::string a = string_field(j, "a");
            const std::string b = string_field(j, "b");
            auto cit = g.contents_.find(ContentId(a));
            if (cit == g.contents_.end())
                fail(ErrorCode::InvalidSnapshot, "edge endpoint '" + a + "' is not a content vertex");
            ContentNode& cn = cit->second;

            if (kind == "deterministic" || kind == "similarity_ct") {
                TagId tid(b);
                auto tit = g.tags_.find(tid);
                if (tit == g.tags_.end()) fail(ErrorCode::InvalidSnapshot, "edge endpoint '" + b + "' is not a tag vertex");
                if (kind == "deterministic") {
                    if (j.contains("weight")) fail(ErrorCode::InvalidSnapshot, "deterministic edges carry no weight");
                    if (!cn.deterministic_tags.insert(tid).second)
                        fail(ErrorCode::InvalidSnapshot, "duplicate deterministic edge " + a + " - " + b);
                    tit->second.deterministic_contents.insert(cit->first);
                } else {
                    const double w = check_weight(cn.embedding, tit->second.embedding, j, g.config_.delta_ct);
                    if (!cn.similar_tags.emplace(tid, w).second)
                        fail(ErrorCode::InvalidSnapshot, "duplicate similarity edge " + a + " - " + b);
                    tit->second.similar_contents.insert(cit->first);
                }
            } else if (kind == "similarity_cc") {
                if (a == b) fail(ErrorCode::InvalidSnapshot, "self-loop on '" + a + "'");
                if (!(a < b)) fail(ErrorCode::InvalidSnapshot, "content-content edge endpoints must be ordered a < b");
                auto oit = g.contents_.find(ContentId(b));
                if (oit == g.contents_.end())
                    fail(ErrorCode::InvalidSnapshot, "edge endpoint '" + b + "' is not a content vertex");
                const double w = check_weight(cn.embedding, oit->second.embedding, j, g.config_.delta_cc);
                if (!cn.similar_contents.emplace(oit->first, w).second)
                    fail(ErrorCode::InvalidSnapshot, "duplicate similarity edge " + a + " - " + b);
                oit->second.similar_contents.emplace(cit->first, w);
            } else {
                fail(ErrorCode::InvalidSnapshot, "unknown record kind '" + kind + "'");
            }
        });
    } catch (const Error& e) {
        if (e.code() == ErrorCode::InvalidSnapshot) throw;
        throw Error(ErrorCode::InvalidSnapshot, e.message());
    }

    if (options.verify_completeness) {
        for (const auto& [cid, cn] : g.contents_) {
            const std::string where = "line " + std::to_string(content_line.at(cid)) + ": ";
            for (const auto& [tid, tn] : g.tags_) {
                if (cosine(cn.embedding, tn.embedding) >= g.config_.delta_ct && !cn.similar_tags.contains(tid))
                    fail(ErrorCode::InvalidSnapshot, where + "missing similarity edge " + cid.str() + " - " + tid.str());
            }
            for (auto it = g.contents_.upper_bound(cid); it != g.contents_.end(); ++it) {
                if (cosine(cn.embedding, it->second.embedding) >= g.config_.delta_cc &&
                    !cn.similar_contents.contains(it->first))
                    fail(ErrorCode::InvalidSnapshot,
                         where + "missing similarity edge " + cid.str() + " - " + it->first.str());
            }
        }
    }
    return g;
}

TagGraph TagGraph::load_file(const std::string& path, GraphConfig config, SnapshotLoadOptions options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open " + path);
    return load(in, config, options);
}

}  // namespace llm4tag
