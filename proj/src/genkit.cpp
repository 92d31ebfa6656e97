#include "llm4tag/genkit.hpp"

#include <algorithm>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include "http_util.hpp"
#include "llm4tag/error.hpp"
#include "llm4tag/jsonl.hpp"
#include "llm4tag/util.hpp"

namespace llm4tag {

std::string_view to_string(TemplateKind kind) noexcept {
    switch (kind) {
        case TemplateKind::Basic: return "basic";
        case TemplateKind::Retrieval: return "retrieval";
        case TemplateKind::Confidence: return "confidence";
    }
    return "basic";
}

void PromptTemplate::validate() const {
    if (trim(scenario).empty()) fail(ErrorCode::InvalidInput, "prompt template needs a scenario");
    if (trim(version).empty()) fail(ErrorCode::InvalidInput, "prompt template needs a version");
}

std::string_view to_string(SegmentSource source) noexcept {
    return source == SegmentSource::Web ? "web" : "domain";
}

// ---------------------------------------------------------------------------
// Knowledge bases

SampleKnowledgeBase::SampleKnowledgeBase(std::shared_ptr<const EncoderBackend> encoder) : encoder_(std::move(encoder)) {
    if (!encoder_) fail(ErrorCode::InvalidInput, "sample knowledge base needs an encoder");
}

void SampleKnowledgeBase::append(Content content, std::vector<TagId> correct, std::vector<TagId> incorrect) {
    content.validate();
    std::set<TagId> good(correct.begin(), correct.end());
    for (const auto& t : incorrect)
        if (good.contains(t))
            fail(ErrorCode::InvalidInput,
                 "sample '" + content.id.str() + "' lists tag '" + t.str() + "' as both correct and incorrect");
    Embedding e = encoder_->embed(canonical_text(content));
    std::unique_lock lock(mutex_);
    entries_.push_back({std::move(content), std::move(correct), std::move(incorrect), std::move(e)});
}

void SampleKnowledgeBase::load(const std::string& path) {
    for_each_jsonl_file(path, [&](const json& j, std::size_t) {
        auto ids = [&](const char* key) {
            std::vector<TagId> out;
            if (auto it = j.find(key); it != j.end())
                for (const auto& s : *it) out.emplace_back(s.get<std::string>());
            return out;
        };
        append(content_from_json(j.at("content")), ids("correct"), ids("incorrect"));
    });
}

std::size_t SampleKnowledgeBase::size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
}

std::vector<SampleEntry> SampleKnowledgeBase::entries() const {
    std::shared_lock lock(mutex_);
    return entries_;
}

CorpusKnowledgeBase::CorpusKnowledgeBase(std::shared_ptr<const EncoderBackend> encoder, std::size_t max_segment_chars)
    : encoder_(std::move(encoder)), max_segment_chars_(max_segment_chars) {
    if (!encoder_) fail(ErrorCode::InvalidInput, "corpus knowledge base needs an encoder");
    if (max_segment_chars_ == 0) fail(ErrorCode::InvalidInput, "segment length bound must be positive");
}

void CorpusKnowledgeBase::append(std::string text, SegmentSource source) {
    text = trim(text);
    if (text.empty()) fail(ErrorCode::InvalidInput, "corpus segment is empty");
    if (text.size() > max_segment_chars_)
        fail(ErrorCode::InvalidInput, "corpus segment has " + std::to_string(text.size()) + " characters, limit is " +
                                          std::to_string(max_segment_chars_));
    Embedding e = encoder_->embed(text);
    std::unique_lock lock(mutex_);
    segments_.push_back({std::move(text), source, std::move(e)});
}

void CorpusKnowledgeBase::load(const std::string& path) {
    for_each_jsonl_file(path, [&](const json& j, std::size_t) {
        const std::string source = j.value("source", std::string("domain"));
        if (source != "web" && source != "domain") fail(ErrorCode::ParseError, "unknown segment source '" + source + "'");
        append(j.at("text").get<std::string>(), source == "web" ? SegmentSource::Web : SegmentSource::Domain);
    });
}

std::size_t CorpusKnowledgeBase::size() const {
    std::shared_lock lock(mutex_);
    return segments_.size();
}

std::vector<CorpusSegment> CorpusKnowledgeBase::segments() const {
    std::shared_lock lock(mutex_);
    return segments_;
}

HttpWebSearchClient::HttpWebSearchClient(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {
    detail::split_url(endpoint_.url);
}

std::vector<std::string> HttpWebSearchClient::search(const std::string& query, std::size_t n) const {
    json reply = detail::post_json(endpoint_.url, endpoint_.token, endpoint_.timeout_seconds, {{"query", query}, {"n", n}});
    std::vector<std::string> out;
    try {
        for (const auto& r : reply.at("results")) {
            out.push_back(r.at("text").get<std::string>());
            if (out.size() == n) break;
        }
    } catch (const json::exception& e) {
        fail(ErrorCode::ParseError, std::string("malformed search reply: ") + e.what());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Retrieval

namespace {

/// Indices of the n best scores, descending, ties by index.
std::vector<std::size_t> top_n(const std::vector<double>& scores, std::size_t n) {
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    const std::size_t keep = std::min(n, idx.size());
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(keep), idx.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (scores[a] != scores[b]) return scores[a] > scores[b];
                          return a < b;
                      });
    idx.resize(keep);
    return idx;
}

}  // namespace

std::vector<SampleEntry> retrieve_icl(const SampleKnowledgeBase& skb, const Embedding& content, std::size_t n) {
    if (n == 0) return {};
    std::vector<SampleEntry> entries = skb.entries();
    std::vector<double> scores;
    scores.reserve(entries.size());
    for (const auto& e : entries) scores.push_back(cosine(content, e.embedding));
    std::vector<SampleEntry> out;
    for (std::size_t i : top_n(scores, n)) out.push_back(std::move(entries[i]));
    return out;
}

std::vector<SampleEntry> retrieve_icl(const SampleKnowledgeBase& skb, const Content& content, std::size_t n) {
    return retrieve_icl(skb, skb.encoder().embed(canonical_text(content)), n);
}

std::vector<CorpusSegment> retrieve_rag(std::span<const CorpusSegment> segments, const Embedding& content,
                                        std::span<const Embedding> candidate_tags, std::size_t n) {
    if (n == 0) return {};
    std::vector<double> scores;
    scores.reserve(segments.size());
    for (const auto& s : segments) {
        double best = cosine(content, s.embedding);
        for (const auto& t : candidate_tags) best = std::max(best, cosine(t, s.embedding));
        scores.push_back(best);
    }
    std::vector<CorpusSegment> out;
    for (std::size_t i : top_n(scores, n)) out.push_back(segments[i]);
    return out;
}

std::vector<CorpusSegment> retrieve_rag(const CorpusKnowledgeBase& ckb, const Embedding& content,
                                        std::span<const Embedding> candidate_tags, std::size_t n) {
    const std::vector<CorpusSegment> segments = ckb.segments();
    return retrieve_rag(std::span<const CorpusSegment>(segments), content, candidate_tags, n);
}

std::vector<CorpusSegment> retrieve_rag(const CorpusKnowledgeBase& ckb, const Content& content,
                                        const CandidateSet& candidates, const TagGraph& graph, std::size_t n) {
    std::vector<Embedding> tags;
    tags.reserve(candidates.size());
    for (const auto& c : candidates.entries) tags.push_back(graph.tag_embedding(c.tag));
    return retrieve_rag(ckb, ckb.encoder().embed(canonical_text(content)), tags, n);
}

// ---------------------------------------------------------------------------
// Prompt rendering

namespace {

std::string tag_label(const TagRepository& repo, const TagId& id) {
    const Tag* t = repo.find(id);
    return t ? trim(t->name) : id.str();
}

std::string joined_labels(const TagRepository& repo, const std::vector<TagId>& ids) {
    if (ids.empty()) return "(none)";
    std::string out;
    for (const auto& id : ids) {
        if (!out.empty()) out += "; ";
        out += tag_label(repo, id);
    }
    return out;
}

void content_block(std::ostringstream& out, const Content& c) {
    out << "### Content\n";
    auto field = [&](std::string_view label, const std::string& value) {
        std::string v = trim(value);
        if (!v.empty()) out << label << ": " << v << '\n';
    };
    field("Title", c.title);
    field("Category", c.category);
    field("Body", c.body);
    for (const auto& [key, value] : c.extra) field(key, value);
}

}  // namespace

std::string render_basic(const PromptTemplate& tmpl, const TagRepository& repo, const Content& content,
                         const CandidateSet& candidates) {
    tmpl.validate();
    content.validate();
    if (candidates.empty()) fail(ErrorCode::InvalidInput, "cannot render a prompt without candidate tags");

    std::ostringstream out;
    out << "You are an expert tagging assistant for the " << trim(tmpl.scenario) << " scenario.\n";
    if (!trim(tmpl.preamble).empty()) out << trim(tmpl.preamble) << '\n';
    out << '\n';
    content_block(out, content);
    out << "\n### Candidate Tags\n";
    std::size_t i = 1;
    for (const auto& c : candidates.entries) {
        const Tag& tag = repo.get(c.tag);
        out << i++ << ". " << trim(tag.name);
        if (!trim(tag.description).empty()) out << " - " << trim(tag.description);
        out << '\n';
    }
    out << "\n### Output Format\n"
           "Select the candidate tags that accurately describe the content, most relevant first.\n"
           "Write one tag per line as \"TAG: <name>\", copying the name exactly as listed.\n"
           "If no candidate applies, write \"TAG: NONE\". Do not write anything else.\n";
    return out.str();
}

std::string render_retrieval(const PromptTemplate& tmpl, const TagRepository& repo, const Content& content,
                             const CandidateSet& candidates, const RetrievedKnowledge& knowledge) {
    std::ostringstream out;
    out << render_basic(tmpl, repo, content, candidates);
    out << "\n### Retrieved Knowledge\n";
    if (knowledge.samples.empty() && knowledge.segments.empty()) {
        out << "(none)\n";
        return out.str();
    }
    std::size_t i = 1;
    for (const auto& s : knowledge.samples) {
        out << "#### Example " << i++ << '\n'
            << "Content: " << canonical_text(s.content) << '\n'
            << "Correct tags: " << joined_labels(repo, s.correct_tags) << '\n'
            << "Incorrect tags: " << joined_labels(repo, s.incorrect_tags) << '\n';
    }
    i = 1;
    for (const auto& seg : knowledge.segments)
        out << "#### Reference " << i++ << " (" << to_string(seg.source) << ")\n" << seg.text << '\n';
    return out.str();
}

// ---------------------------------------------------------------------------
// Generation

std::optional<std::vector<std::string>> parse_tag_lines(std::string_view text) {
    std::vector<std::string> names;
    bool any = false;
    bool none = false;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (t.size() < 4) continue;
        std::string head = normalize_text(t.substr(0, 4));
        if (head != "tag:") continue;
        std::string name = trim(std::string_view(t).substr(4));
        if (name.size() >= 2 && name.front() == '"' && name.back() == '"') name = trim(name.substr(1, name.size() - 2));
        if (name.empty()) continue;
        any = true;
        if (normalize_text(name) == "none") {
            none = true;
            continue;
        }
        names.push_back(std::move(name));
    }
    if (!any) return std::nullopt;
    if (none && names.empty()) return std::vector<std::string>{};
    return names;
}

std::string format_tag_lines(const TagRepository& repo, std::span<const TagId> tags) {
    if (tags.empty()) return "TAG: NONE\n";
    std::string out;
    for (const auto& t : tags) out += "TAG: " + trim(repo.get(t).name) + "\n";
    return out;
}

GenerationResult generate_tags(const CompletionClient& client, const PromptTemplate& tmpl, const TagRepository& repo,
                               const Content& content, const CandidateSet& candidates,
                               const RetrievedKnowledge& knowledge, const GenerationOptions& options) {
    const std::string prompt = render_retrieval(tmpl, repo, content, candidates, knowledge);

    std::unordered_map<std::string, TagId> by_name;
    for (const auto& c : candidates.entries) by_name.emplace(normalize_tag_name(repo.get(c.tag).name), c.tag);

    GenerationResult result;
    const int attempts = 1 + std::max(0, options.retries);
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        result.attempts = attempt;
        CompletionResult reply = client.complete({prompt, options.max_tokens, false});
        result.raw_output = reply.text;
        auto names = parse_tag_lines(reply.text);
        if (!names) continue;
        std::set<TagId> seen;
        for (const auto& name : *names) {
            auto it = by_name.find(normalize_tag_name(name));
            if (it == by_name.end()) {
                result.dropped.push_back(name);
            } else if (seen.insert(it->second).second) {
                result.tags.push_back(it->second);
            }
        }
        return result;
    }
    fail(ErrorCode::GenerationFailed, "unparseable output for content '" + content.id.str() + "' after " +
                                          std::to_string(attempts) + " attempts");
}

// ---------------------------------------------------------------------------
// Supervised fine-tuning export

std::vector<SftRecord> export_sft(const PromptTemplate& tmpl, const TagRepository& repo,
                                  std::span<const SftExample> examples) {
    std::vector<SftRecord> out;
    out.reserve(examples.size());
    for (std::size_t i = 0; i < examples.size(); ++i) {
        const SftExample& ex = examples[i];
        const std::string where = "example #" + std::to_string(i + 1) + " (content '" + ex.content.id.str() + "')";
        for (const auto& g : ex.gold)
            if (!ex.candidates.contains(g))
                fail(ErrorCode::InvalidRecord, where + ": gold tag '" + g.str() + "' is not among its candidates");
        try {
            out.push_back({render_basic(tmpl, repo, ex.content, ex.candidates), format_tag_lines(repo, ex.gold)});
        } catch (const Error& e) {
            throw Error(ErrorCode::InvalidRecord, where + ": " + e.what());
        }
    }
    return out;
}

void write_sft(std::ostream& out, std::span<const SftRecord> records) {
    for (const auto& r : records) out << dump_line({{"input", r.input}, {"target", r.target}}) << '\n';
}

std::vector<SftRecord> read_sft(std::istream& in) {
    std::vector<SftRecord> out;
    for_each_jsonl(in, [&](const json& j, std::size_t) {
        out.push_back({j.at("input").get<std::string>(), j.at("target").get<std::string>()});
    });
    return out;
}

}  // namespace llm4tag
