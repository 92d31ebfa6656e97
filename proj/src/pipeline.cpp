#include "llm4tag/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <sstream>
#include <thread>

#include "llm4tag/error.hpp"
#include "llm4tag/jsonl.hpp"
#include "llm4tag/util.hpp"

namespace llm4tag {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
    return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

}  // namespace

bool ContentReport::has_flag(std::string_view flag) const {
    return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

nlohmann::json to_json(const ContentReport& entry, bool include_timings) {
    json candidates = json::array();
    for (const auto& c : entry.candidates.entries)
        candidates.push_back({{"tag", c.tag.str()}, {"score", c.score}, {"provenance", to_string(c.provenance)}});
    json generated = json::array();
    for (const auto& t : entry.generated) generated.push_back(t.str());
    json assignments = json::array();
    for (const auto& a : entry.assignments)
        assignments.push_back({{"tag", a.tag.str()}, {"confidence", *a.confidence}, {"provenance", to_string(a.provenance)}});
    json pruned = json::array();
    for (const auto& p : entry.pruned) pruned.push_back({{"tag", p.tag.str()}, {"confidence", p.confidence}});

    json j = {{"content", entry.content.str()},
              {"candidates", std::move(candidates)},
              {"generated", std::move(generated)},
              {"assignments", std::move(assignments)},
              {"pruned", std::move(pruned)},
              {"flags", entry.flags}};
    if (!entry.dropped.empty()) j["dropped"] = entry.dropped;
    if (!entry.scoring_failures.empty()) {
        json failures = json::array();
        for (const auto& f : entry.scoring_failures)
            failures.push_back({{"tag", f.tag.str()}, {"error", to_string(f.code)}, {"message", f.message}});
        j["scoring_failures"] = std::move(failures);
    }
    if (entry.error_code) j["error"] = {{"code", to_string(*entry.error_code)}, {"message", entry.error}};
    if (include_timings)
        j["timings_ms"] = {{"recall", entry.timings.recall_ms},
                           {"generation", entry.timings.generation_ms},
                           {"calibration", entry.timings.calibration_ms},
                           {"total", entry.timings.total_ms}};
    return j;
}

std::size_t TaggingReport::failed_count() const {
    return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(), [](const auto& e) { return e.failed(); }));
}

std::size_t TaggingReport::committed_edge_count() const {
    std::size_t n = 0;
    for (const auto& e : entries) n += e.assignments.size();
    return n;
}

nlohmann::json TaggingReport::to_json(bool include_timings) const {
    json list = json::array();
    std::size_t no_candidates = 0;
    std::size_t tagged = 0;
    for (const auto& e : entries) {
        list.push_back(llm4tag::to_json(e, include_timings));
        no_candidates += e.has_flag(flags::kNoCandidates) ? 1 : 0;
        tagged += e.assignments.empty() ? 0 : 1;
    }
    return {{"entries", std::move(list)},
            {"summary",
             {{"contents", entries.size()},
              {"tagged", tagged},
              {"no_candidates", no_candidates},
              {"failed", failed_count()},
              {"committed_edges", committed_edge_count()}}}};
}

std::vector<Annotation> load_annotations(const std::string& path) {
    std::vector<Annotation> out;
    for_each_jsonl_file(path, [&](const json& j, std::size_t) {
        Annotation a{ContentId(j.at("content").get<std::string>()), {}};
        for (const auto& t : j.at("tags")) a.tags.emplace_back(t.get<std::string>());
        out.push_back(std::move(a));
    });
    return out;
}

Pipeline::Pipeline(PipelineConfig config, std::shared_ptr<const EncoderBackend> encoder,
                   std::shared_ptr<const CompletionClient> client)
    : config_(std::move(config)),
      encoder_(std::move(encoder)),
      client_(std::move(client)),
      samples_(encoder_),
      corpus_(encoder_, config_.max_segment_chars),
      graph_(config_.graph) {
    config_.validate();
    if (!client_) fail(ErrorCode::InvalidInput, "pipeline needs a completion client");
}

std::unique_ptr<Pipeline> Pipeline::from_config(PipelineConfig config) {
    config.validate();
    auto encoder = make_encoder(config);
    auto client = make_completion_client(config);
    auto p = std::make_unique<Pipeline>(config, std::move(encoder), std::move(client));
    if (!config.samples_path.empty()) p->samples_.load(config.samples_path);
    if (!config.corpus_path.empty()) p->corpus_.load(config.corpus_path);
    if (!config.search_endpoint.url.empty()) p->set_web_search(std::make_shared<HttpWebSearchClient>(config.search_endpoint));
    return p;
}

std::size_t Pipeline::ingest_tags(std::span<const Tag> tags) {
    std::unique_lock lock(graph_mutex_);
    TagRepository staged = repo_;
    for (const auto& t : tags) {
        if (graph_.has_tag(t.id)) fail(ErrorCode::DuplicateVertex, "tag vertex '" + t.id.str() + "' exists");
        staged.add(t);
    }
    std::vector<Embedding> embeddings;
    embeddings.reserve(tags.size());
    for (const auto& t : tags) embeddings.push_back(encoder_->embed(canonical_text(t)));
    TagGraph next = graph_;
    for (std::size_t i = 0; i < tags.size(); ++i) next.add_tag(tags[i].id, std::move(embeddings[i]));
    repo_ = std::move(staged);
    graph_ = std::move(next);
    return tags.size();
}

std::size_t Pipeline::ingest_repository(const std::string& path) {
    const std::vector<Tag> tags = load_tags(path);
    return ingest_tags(tags);
}

std::size_t Pipeline::ingest_contents(std::span<const Content> contents, std::span<const Annotation> annotations) {
    std::vector<Embedding> embeddings;
    embeddings.reserve(contents.size());
    for (const auto& c : contents) {
        c.validate();
        embeddings.push_back(encoder_->embed(canonical_text(c)));
    }
    std::unique_lock lock(graph_mutex_);
    TagGraph next = graph_;
    for (std::size_t i = 0; i < contents.size(); ++i) next.add_content(contents[i].id, std::move(embeddings[i]));
    for (const auto& a : annotations) next.commit_tags(a.content, a.tags);
    graph_ = std::move(next);
    return contents.size();
}

RetrievedKnowledge Pipeline::gather_knowledge(const Content& content, const Embedding& embedding,
                                              const CandidateSet& candidates, ContentReport& entry) const {
    RetrievedKnowledge k;
    k.samples = retrieve_icl(samples_, embedding, config_.icl_n);

    std::vector<Embedding> tag_embeddings;
    {
        std::shared_lock lock(graph_mutex_);
        for (const auto& c : candidates.entries) tag_embeddings.push_back(graph_.tag_embedding(c.tag));
    }
    std::vector<CorpusSegment> pool = corpus_.segments();
    if (search_ && config_.rag_n > 0) {
        try {
            for (auto& text : search_->search(canonical_text(content), config_.rag_n)) {
                std::string t = trim(text);
                if (t.empty()) continue;
                if (t.size() > config_.max_segment_chars) t.resize(config_.max_segment_chars);
                Embedding e = encoder_->embed(t);
                pool.push_back({std::move(t), SegmentSource::Web, std::move(e)});
            }
        } catch (const Error&) {
            entry.flags.emplace_back(flags::kWebSearchFailed);
        }
    }
    k.segments = retrieve_rag(std::span<const CorpusSegment>(pool), embedding, tag_embeddings, config_.rag_n);
    return k;
}

ContentReport Pipeline::tag_content(const Content& content) {
    const auto start = Clock::now();
    ContentReport entry;
    entry.content = content.id;
    bool inserted = false;

    try {
        content.validate();
        Embedding embedding = encoder_->embed(canonical_text(content));
        {
            std::unique_lock lock(graph_mutex_);
            graph_.add_content(content.id, embedding);
            inserted = true;
        }

        auto t0 = Clock::now();
        {
            std::shared_lock lock(graph_mutex_);
            entry.candidates = graph_.recall(content.id);
        }
        entry.timings.recall_ms = elapsed_ms(t0);

        if (entry.candidates.empty()) {
            entry.flags.emplace_back(flags::kNoCandidates);
            entry.timings.total_ms = elapsed_ms(start);
            return entry;
        }

        t0 = Clock::now();
        RetrievedKnowledge knowledge = gather_knowledge(content, embedding, entry.candidates, entry);
        GenerationResult gen =
            generate_tags(*client_, config_.prompt, repo_, content, entry.candidates, knowledge, config_.generation);
        entry.generated = std::move(gen.tags);
        entry.dropped = std::move(gen.dropped);
        if (!entry.dropped.empty()) entry.flags.emplace_back(flags::kHallucinated);
        entry.timings.generation_ms = elapsed_ms(t0);

        if (entry.generated.empty()) {
            entry.flags.emplace_back(flags::kNoTags);
            entry.timings.total_ms = elapsed_ms(start);
            return entry;
        }

        t0 = Clock::now();
        CalibrationResult cal = calibrate(*client_, config_.prompt, repo_, content, entry.generated, config_.calibration);
        entry.timings.calibration_ms = elapsed_ms(t0);
        entry.pruned = std::move(cal.pruned);
        entry.scoring_failures = std::move(cal.failures);
        if (!entry.scoring_failures.empty()) entry.flags.emplace_back(flags::kScoringFailed);

        std::vector<TagId> survivors;
        for (const auto& k : cal.kept) {
            Provenance prov = Provenance::C2T;
            for (const auto& c : entry.candidates.entries)
                if (c.tag == k.tag) prov = c.provenance;
            entry.assignments.push_back({content.id, k.tag, k.confidence, prov});
            survivors.push_back(k.tag);
        }
        {
            std::unique_lock lock(graph_mutex_);
            graph_.commit_tags(content.id, survivors);
        }
    } catch (const Error& e) {
        if (inserted) {
            std::unique_lock lock(graph_mutex_);
            graph_.remove_content(content.id);
        }
        entry.candidates.entries.clear();
        entry.generated.clear();
        entry.assignments.clear();
        entry.pruned.clear();
        entry.flags.emplace_back(flags::kFailed);
        entry.error_code = e.code();
        entry.error = e.what();
    }
    entry.timings.total_ms = elapsed_ms(start);
    return entry;
}

TaggingReport Pipeline::run_batch(std::span<const Content> contents) {
    TaggingReport report;
    report.entries.resize(contents.size());
    const std::size_t workers = std::min(config_.parallelism, contents.size());
    if (workers <= 1) {
        for (std::size_t i = 0; i < contents.size(); ++i) report.entries[i] = tag_content(contents[i]);
        return report;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < contents.size(); i = next++) report.entries[i] = tag_content(contents[i]);
        });
    }
    pool.clear();
    return report;
}

CandidateSet Pipeline::candidates(const ContentId& content) const {
    std::shared_lock lock(graph_mutex_);
    return graph_.recall(content);
}

double Pipeline::confidence(const Content& content, const TagId& tag) const {
    return llm4tag::confidence(*client_, config_.prompt, content, repo_.get(tag));
}

std::string Pipeline::snapshot() const {
    std::shared_lock lock(graph_mutex_);
    return graph_.snapshot();
}

void Pipeline::save_snapshot(const std::string& path) const { write_file_atomic(path, snapshot()); }

void Pipeline::install_graph(TagGraph graph) {
    for (const auto* tag : repo_.all())
        if (!graph.has_tag(tag->id))
            fail(ErrorCode::InvalidSnapshot, "snapshot lacks a vertex for repository tag '" + tag->id.str() + "'");
    if (graph.tag_count() != repo_.size())
        fail(ErrorCode::InvalidSnapshot, "snapshot has tag vertices missing from the repository");
    if (graph.dim() && *graph.dim() != encoder_->dim())
        fail(ErrorCode::InvalidSnapshot, "snapshot embeddings have dimension " + std::to_string(*graph.dim()) +
                                             ", encoder produces " + std::to_string(encoder_->dim()));
    std::unique_lock lock(graph_mutex_);
    graph_ = std::move(graph);
}

void Pipeline::load_snapshot(const std::string& path) { install_graph(TagGraph::load_file(path, config_.graph)); }

void Pipeline::load_snapshot_text(const std::string& text) {
    std::istringstream in(text);
    install_graph(TagGraph::load(in, config_.graph));
}

std::size_t Pipeline::content_count() const {
    std::shared_lock lock(graph_mutex_);
    return graph_.content_count();
}

std::size_t Pipeline::edge_count() const {
    std::shared_lock lock(graph_mutex_);
    return graph_.edge_count();
}

std::vector<TagId> Pipeline::deterministic_tags(const ContentId& content) const {
    std::shared_lock lock(graph_mutex_);
    return graph_.deterministic_tags(content);
}

}  // namespace llm4tag
