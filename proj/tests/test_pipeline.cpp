#include <gtest/gtest.h>

#include <fstream>

#include "llm4tag/pipeline.hpp"
#include "support/pipeline_fixtures.hpp"

using namespace llm4tag;
using fixtures::FeedbackFixture;

TEST(Pipeline, ScriptedContentGetsCalibratedTagsAndTwoEdges) {
    FeedbackFixture fx;
    auto p = fx.pipeline();
    const auto entry = p->tag_content(fx.c1);
    ASSERT_FALSE(entry.failed()) << entry.error;
    ASSERT_EQ(entry.assignments.size(), 2u);
    EXPECT_EQ(entry.assignments[0].tag.str(), "t-alpha");
    EXPECT_NEAR(*entry.assignments[0].confidence, 0.9, 1e-12);
    EXPECT_EQ(entry.assignments[1].tag.str(), "t-beta");
    EXPECT_NEAR(*entry.assignments[1].confidence, 0.8, 1e-12);
    EXPECT_EQ(p->deterministic_tags(fx.c1.id).size(), 2u);
    EXPECT_TRUE(entry.flags.empty());
}

TEST(Pipeline, SecondContentRecallsCommittedTagsThroughNeighbour) {
    FeedbackFixture fx;
    auto p = fx.pipeline();
    (void)p->tag_content(fx.c1);
    const auto entry = p->tag_content(fx.c2);
    ASSERT_FALSE(entry.failed()) << entry.error;

    auto raw = fx.raw;
    const Embedding e2 = p->encoder().embed("second story");
    const auto v2 = e2.values();
    raw.contents.emplace_back("c2", std::vector<double>(v2.begin(), v2.end()));
    raw.deterministic = {{"c1", "t-alpha"}, {"c1", "t-beta"}};
    const auto want = fixtures::oracle_recall(raw, "c2");
    ASSERT_EQ(entry.candidates.size(), want.size());
    for (std::size_t i = 0; i < want.size(); ++i) {
        EXPECT_EQ(entry.candidates.entries[i].tag.str(), want[i].tag);
        EXPECT_EQ(to_string(entry.candidates.entries[i].provenance), "C2C2T");
    }
    ASSERT_EQ(entry.assignments.size(), 1u);
    EXPECT_EQ(entry.assignments[0].provenance, Provenance::C2C2T);
}

TEST(Pipeline, NoCandidatesSkipsTheModel) {
    FeedbackFixture fx;
    fixtures::plant(*fx.encoder, "lonely", {0, 0, 0, 0, 0, 0, 0, 1});
    auto p = fx.pipeline();
    const auto entry = p->tag_content({ContentId("x"), "lonely", "", "", {}});
    EXPECT_TRUE(entry.has_flag(flags::kNoCandidates));
    EXPECT_TRUE(entry.assignments.empty());
    EXPECT_EQ(fx.client->call_count(), 0u);
    EXPECT_EQ(p->content_count(), 1u);
}

TEST(Pipeline, GenerationFailureRollsBackTheContent) {
    FeedbackFixture fx;
    fixtures::plant(*fx.encoder, "broken", {1, 0, 0, 0, 0, 0, 0, 0});
    fx.client->add_contains_rule({"### Candidate Tags", "Title: broken"}, {"gibberish", std::nullopt, false});
    auto p = fx.pipeline();
    const std::string before = p->snapshot();
    const auto entry = p->tag_content({ContentId("b"), "broken", "", "", {}});
    ASSERT_TRUE(entry.failed());
    EXPECT_EQ(*entry.error_code, ErrorCode::GenerationFailed);
    EXPECT_TRUE(entry.has_flag(flags::kFailed));
    EXPECT_TRUE(entry.assignments.empty());
    EXPECT_EQ(p->snapshot(), before);
}

TEST(Pipeline, BackendOutageIsIsolatedPerContent) {
    FeedbackFixture fx;
    fixtures::plant(*fx.encoder, "outage", {0.99, std::sqrt(1 - 0.99 * 0.99), 0, 0, 0, 0, 0, 0});
    fx.client->add_contains_rule({"Title: outage"}, {"", std::nullopt, true});
    auto p = fx.pipeline();
    const std::vector<Content> batch = {{ContentId("o"), "outage", "", "", {}}, fx.c1};
    const auto report = p->run_batch(batch);
    ASSERT_EQ(report.entries.size(), 2u);
    EXPECT_EQ(*report.entries[0].error_code, ErrorCode::BackendUnavailable);
    EXPECT_FALSE(report.entries[1].failed());
    EXPECT_EQ(report.failed_count(), 1u);
    EXPECT_EQ(p->content_count(), 1u);
}

TEST(Pipeline, DuplicateContentIsReportedWithoutTouchingTheGraph) {
    FeedbackFixture fx;
    auto p = fx.pipeline();
    (void)p->tag_content(fx.c1);
    const std::string before = p->snapshot();
    const auto again = p->tag_content(fx.c1);
    ASSERT_TRUE(again.failed());
    EXPECT_EQ(*again.error_code, ErrorCode::DuplicateVertex);
    EXPECT_EQ(p->snapshot(), before);
}

TEST(Pipeline, HallucinationsAndLowConfidenceAreReported) {
    FeedbackFixture fx;
    fx.client->queue(fixtures::answer({"beta", "gamma"}));
    fx.client->queue(fixtures::judged(0.2));
    auto p = fx.pipeline();
    const auto entry = p->tag_content(fx.c1);
    EXPECT_TRUE(entry.has_flag(flags::kHallucinated));
    EXPECT_EQ(entry.dropped, std::vector<std::string>{"gamma"});
    ASSERT_EQ(entry.pruned.size(), 1u);
    EXPECT_TRUE(entry.assignments.empty());
    EXPECT_TRUE(p->deterministic_tags(fx.c1.id).empty());
}

TEST(Pipeline, EmptyBatchLeavesSnapshotUnchanged) {
    FeedbackFixture fx;
    auto p = fx.pipeline();
    const std::string before = p->snapshot();
    const auto report = p->run_batch({});
    EXPECT_TRUE(report.entries.empty());
    EXPECT_EQ(p->snapshot(), before);
    EXPECT_EQ(report.to_json()["summary"]["contents"], 0);
}

TEST(Pipeline, ParallelismDoesNotChangeTheResult) {
    std::string reference_snapshot, reference_report;
    for (std::size_t workers : {1u, 4u}) {
        FeedbackFixture fx;
        std::vector<Content> batch;
        for (int i = 0; i < 10; ++i) {
            const std::string title = "item " + std::to_string(i);
            std::vector<double> v(8, 0.0);
            v[0] = 0.75;
            v[4 + i % 4] = (i / 4 % 2 ? -1.0 : 1.0) * std::sqrt(1 - 0.75 * 0.75);
            if (i >= 8) {
                v[4 + i % 4] = 0.0;
                v[1] = std::sqrt(1 - 0.75 * 0.75) * (i == 8 ? 1 : -1);
            }
            fixtures::plant(*fx.encoder, title, v);
            batch.push_back({ContentId("n" + std::to_string(i)), title, "", "", {}});
            fx.client->add_contains_rule({"### Candidate Tags", "Title: " + title + "\n"}, fixtures::answer({"alpha"}));
        }
        PipelineConfig cfg;
        cfg.parallelism = workers;
        auto p = fx.pipeline(cfg);
        const auto report = p->run_batch(batch);
        EXPECT_EQ(report.failed_count(), 0u);
        if (reference_snapshot.empty()) {
            reference_snapshot = p->snapshot();
            reference_report = report.to_json().dump();
        } else {
            EXPECT_EQ(p->snapshot(), reference_snapshot);
            EXPECT_EQ(report.to_json().dump(), reference_report);
        }
    }
}

TEST(Pipeline, ResumeFromSnapshotKeepsCommittedEdges) {
    fixtures::TempDir dir;
    FeedbackFixture fx;
    {
        auto p = fx.pipeline();
        (void)p->tag_content(fx.c1);
        p->save_snapshot(dir.file("g.jsonl"));
    }
    auto p = fx.pipeline();
    p->load_snapshot(dir.file("g.jsonl"));
    EXPECT_EQ(p->deterministic_tags(fx.c1.id).size(), 2u);
    const auto entry = p->tag_content(fx.c2);
    EXPECT_EQ(entry.candidates.size(), 2u);
}

TEST(Pipeline, SnapshotMustAgreeWithRepository) {
    FeedbackFixture fx;
    auto p = fx.pipeline();
    TagGraph g;
    g.add_tag(TagId("t-alpha"), Embedding({1, 0, 0, 0, 0, 0, 0, 0}));
    try {
        p->load_snapshot_text(g.snapshot());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidSnapshot);
    }
}

TEST(Pipeline, IngestRepositoryFromFile) {
    fixtures::TempDir dir;
    const auto path = dir.file("tags.jsonl");
    std::ofstream(path) << R"({"id":"a","name":"apples"})" "\n"
                        << R"({"id":"b","name":"bananas","description":"yellow fruit"})" "\n"
                        << R"({"id":"c","name":"cherries"})" "\n";
    PipelineConfig cfg;
    auto enc = std::make_shared<HashingEncoder>(32);
    auto client = std::make_shared<MockCompletionClient>();
    Pipeline p1(cfg, enc, client), p2(cfg, enc, client);
    EXPECT_EQ(p1.ingest_repository(path), 3u);
    EXPECT_EQ(p1.repository().size(), 3u);
    p2.ingest_repository(path);
    EXPECT_EQ(p1.snapshot(), p2.snapshot());

    try {
        p1.ingest_repository(path);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DuplicateVertex);
    }
    EXPECT_EQ(p1.repository().size(), 3u);

    std::ofstream(path) << R"({"id":"d","name":"dates"})" "\n{broken\n";
    try {
        Pipeline p3(cfg, enc, client);
        p3.ingest_repository(path);
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
    }
}

TEST(Pipeline, HistoricalAnnotationsSeedDeterministicEdges) {
    FeedbackFixture fx;
    auto p = fx.pipeline();
    const std::vector<Content> history = {fx.c1};
    const std::vector<Annotation> notes = {{fx.c1.id, {TagId("t-beta")}}};
    p->ingest_contents(history, notes);
    EXPECT_EQ(p->deterministic_tags(fx.c1.id), std::vector<TagId>{TagId("t-beta")});
    const std::vector<Annotation> bad = {{ContentId("ghost"), {TagId("t-beta")}}};
    const std::vector<Content> more = {fx.c2};
    EXPECT_THROW(p->ingest_contents(more, bad), Error);
    EXPECT_EQ(p->content_count(), 1u);
}

namespace {
class FailingSearch final : public WebSearchClient {
public:
    std::vector<std::string> search(const std::string&, std::size_t) const override {
        fail(ErrorCode::BackendUnavailable, "search is down");
    }
};
}  // namespace

TEST(Pipeline, WebSearchFailureIsFlaggedNotFatal) {
    FeedbackFixture fx;
    auto p = fx.pipeline();
    p->set_web_search(std::make_shared<FailingSearch>());
    const auto entry = p->tag_content(fx.c1);
    EXPECT_FALSE(entry.failed());
    EXPECT_TRUE(entry.has_flag(flags::kWebSearchFailed));
    EXPECT_EQ(entry.assignments.size(), 2u);
}

TEST(Pipeline, ReportOmitsTimingsUnlessAsked) {
    FeedbackFixture fx;
    auto p = fx.pipeline();
    TaggingReport report;
    report.entries.push_back(p->tag_content(fx.c1));
    EXPECT_FALSE(report.to_json()["entries"][0].contains("timings_ms"));
    EXPECT_TRUE(report.to_json(true)["entries"][0].contains("timings_ms"));
    EXPECT_EQ(report.to_json()["summary"]["committed_edges"], 2);
}
