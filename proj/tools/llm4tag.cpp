// Command-line front end: ingestion, batch tagging, evaluation, dataset
// export, snapshot management and the HTTP service.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "llm4tag/calibrate.hpp"
#include "llm4tag/config.hpp"
#include "llm4tag/evalkit.hpp"
#include "llm4tag/jsonl.hpp"
#include "llm4tag/pipeline.hpp"
#include "llm4tag/service.hpp"
#include "llm4tag/util.hpp"

namespace fs = std::filesystem;
using namespace llm4tag;

namespace {

struct State {
    std::string dir = "llm4tag-state";
    std::string config_path;

    [[nodiscard]] fs::path tags() const { return fs::path(dir) / "tags.jsonl"; }
    [[nodiscard]] fs::path graph() const { return fs::path(dir) / "graph.snapshot.jsonl"; }
};

PipelineConfig load_config(const State& st) {
    PipelineConfig config = st.config_path.empty() ? PipelineConfig{} : load_config_file(st.config_path);
    apply_env_overrides(config);
    config.validate();
    return config;
}

std::unique_ptr<Pipeline> open_pipeline(const State& st, const PipelineConfig& config) {
    auto p = Pipeline::from_config(config);
    if (fs::exists(st.tags())) p->ingest_repository(st.tags().string());
    if (fs::exists(st.graph())) p->load_snapshot(st.graph().string());
    return p;
}

void persist(const State& st, const Pipeline& p) {
    fs::create_directories(st.dir);
    std::string tags;
    for (const auto* t : p.repository().all()) tags += dump_line(to_json(*t)) + '\n';
    write_file_atomic(st.tags().string(), tags);
    p.save_snapshot(st.graph().string());
}

std::vector<TagId> tag_ids(const json& j) {
    std::vector<TagId> out;
    for (const auto& t : j) out.emplace_back(t.get<std::string>());
    return out;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');)
        if (!trim(item).empty()) out.push_back(trim(item));
    return out;
}

Service* g_service = nullptr;

extern "C" void on_signal(int) {
    if (g_service) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Graph-recall, LLM generation and confidence calibration for content tagging"};
    app.require_subcommand(1);
    State st;
    app.add_option("--state", st.dir, "State directory (tag repository + graph snapshot)");
    app.add_option("--config", st.config_path, "key = value configuration file");

    std::string file;
    std::string annotations;
    std::string out;
    std::string metrics = "acc@1,acc@2,acc@3,coverage@1,prf";
    bool timings = false;
    std::size_t parallelism = 0;
    std::string snapshot_action;
    std::string host = "127.0.0.1";
    int port = 8080;

    auto* ingest_tags = app.add_subcommand("ingest-tags", "Add tags to the repository and graph");
    ingest_tags->add_option("file", file, "Tag JSONL file")->required();

    auto* ingest_contents = app.add_subcommand("ingest-contents", "Add historical contents to the graph");
    ingest_contents->add_option("file", file, "Content JSONL file")->required();
    ingest_contents->add_option("--annotations", annotations, "JSONL {\"content\", \"tags\"} seeding deterministic edges");

    auto* tag = app.add_subcommand("tag", "Tag new contents and commit the results");
    tag->add_option("file", file, "Content JSONL file")->required();
    tag->add_option("--out", out, "Report JSON path")->required();
    tag->add_flag("--timings", timings, "Include per-stage timings in the report");
    tag->add_option("--parallelism", parallelism, "Override the configured worker count");

    auto* eval = app.add_subcommand("eval", "Compute metrics over a judged-results file");
    eval->add_option("file", file, "Judged JSONL file")->required();
    eval->add_option("--metrics", metrics, "Comma-separated list, e.g. acc@1,coverage@2,prf,right,hr@3");

    auto* ri = app.add_subcommand("ri", "Mean relative improvement over a metric pairing file");
    ri->add_option("file", file, "JSONL {\"metric\", \"ours\", \"baseline\"}")->required();

    auto* sft_cmd = app.add_subcommand("export-sft", "Write the fine-tuning dataset for tag generation");
    sft_cmd->add_option("--input", file, "JSONL {\"content\", \"candidates\", \"gold\"}")->required();
    sft_cmd->add_option("--out", out, "Output JSONL")->required();

    auto* conf_cmd = app.add_subcommand("export-confidence", "Write the fine-tuning dataset for relevance judgment");
    conf_cmd->add_option("--input", file, "JSONL {\"content\", \"tag\", \"label\"}")->required();
    conf_cmd->add_option("--out", out, "Output JSONL")->required();

    auto* snapshot = app.add_subcommand("snapshot", "Save or restore the graph");
    snapshot->add_option("action", snapshot_action, "save | load")->required()->check(CLI::IsMember({"save", "load"}));
    snapshot->add_option("file", file, "Snapshot path")->required();

    auto* serve = app.add_subcommand("serve", "Run the HTTP service");
    serve->add_option("--host", host, "Bind address");
    serve->add_option("--port", port, "Port (0 picks a free one)");

    CLI11_PARSE(app, argc, argv);

    try {
        PipelineConfig config = load_config(st);
        if (parallelism > 0) config.parallelism = parallelism;
        if (timings) config.report_timings = true;

        if (*ingest_tags) {
            auto p = open_pipeline(st, config);
            const std::size_t n = p->ingest_repository(file);
            persist(st, *p);
            std::cout << "ingested " << n << " tags\n";
        } else if (*ingest_contents) {
            auto p = open_pipeline(st, config);
            const auto contents = load_contents(file);
            const auto notes = annotations.empty() ? std::vector<Annotation>{} : load_annotations(annotations);
            const std::size_t n = p->ingest_contents(contents, notes);
            persist(st, *p);
            std::cout << "ingested " << n << " contents\n";
        } else if (*tag) {
            auto p = open_pipeline(st, config);
            const auto contents = load_contents(file);
            const TaggingReport report = p->run_batch(contents);
            write_file_atomic(out, report.to_json(config.report_timings).dump(2) + '\n');
            persist(st, *p);
            std::cout << "tagged " << report.entries.size() << " contents, " << report.committed_edge_count()
                      << " edges committed, " << report.failed_count() << " failed\n";
        } else if (*eval) {
            std::cout << evaluate_metrics(load_judged_file(file), split_list(metrics)).dump(2) << '\n';
        } else if (*ri) {
            std::cout << json{{"relative_improvement", relative_improvement(load_metric_pairs(file))}}.dump(2) << '\n';
        } else if (*sft_cmd) {
            auto p = open_pipeline(st, config);
            std::vector<SftExample> examples;
            for_each_jsonl_file(file, [&](const json& j, std::size_t) {
                Content c = content_from_json(j.at("content"));
                const auto ids = tag_ids(j.at("candidates"));
                examples.push_back({c, CandidateSet::from_ids(c.id, ids), tag_ids(j.at("gold"))});
            });
            std::ostringstream buf;
            write_sft(buf, export_sft(config.prompt, p->repository(), examples));
            write_file_atomic(out, buf.str());
            std::cout << "wrote " << examples.size() << " records\n";
        } else if (*conf_cmd) {
            auto p = open_pipeline(st, config);
            std::vector<ConfidenceExample> examples;
            for_each_jsonl_file(file, [&](const json& j, std::size_t) {
                examples.push_back({content_from_json(j.at("content")),
                                    p->repository().get(TagId(j.at("tag").get<std::string>())),
                                    j.at("label").get<std::string>()});
            });
            std::ostringstream buf;
            write_confidence_dataset(buf, export_confidence_dataset(config.prompt, examples));
            write_file_atomic(out, buf.str());
            std::cout << "wrote " << examples.size() << " records\n";
        } else if (*snapshot) {
            auto p = open_pipeline(st, config);
            if (snapshot_action == "save") {
                p->save_snapshot(file);
                std::cout << "saved " << p->content_count() << " contents, " << p->edge_count() << " edges\n";
            } else {
                p->load_snapshot(file);
                persist(st, *p);
                std::cout << "loaded " << p->content_count() << " contents, " << p->edge_count() << " edges\n";
            }
        } else if (*serve) {
            auto p = open_pipeline(st, config);
            Service service(*p);
            const int bound = service.bind(host, port);
            g_service = &service;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cout << "listening on " << host << ':' << bound << std::endl;
            service.listen();
            g_service = nullptr;
            persist(st, *p);
        }
    } catch (const Error& e) {
        std::cerr << "error [" << to_string(e.code()) << "]: " << e.message() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
