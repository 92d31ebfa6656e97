#include "llm4tag/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "llm4tag/error.hpp"
#include "llm4tag/jsonl.hpp"
#include "llm4tag/util.hpp"

namespace llm4tag {

void CalibrationConfig::validate() const {
    if (!(threshold >= 0.0 && threshold <= 1.0)) fail(ErrorCode::InvalidInput, "confidence threshold must lie in [0, 1]");
}

std::string render_confidence(const PromptTemplate& tmpl, const Content& content, const Tag& tag) {
    tmpl.validate();
    content.validate();
    tag.validate();
    std::ostringstream out;
    out << "You are judging tag relevance for the " << trim(tmpl.scenario) << " scenario.\n";
    if (!trim(tmpl.preamble).empty()) out << trim(tmpl.preamble) << '\n';
    out << "\n### Content\n" << canonical_text(content) << '\n';
    out << "\n### Tag\n" << trim(tag.name) << '\n';
    if (!trim(tag.description).empty()) out << "Description: " << trim(tag.description) << '\n';
    out << "\n### Question\n"
           "Is the tag relevant to the content? Answer with exactly one word: Yes or No.\n";
    return out.str();
}

double confidence_from_scores(double yes_logprob, double no_logprob) noexcept {
    const double d = yes_logprob - no_logprob;
    double p;
    if (d >= 0.0) {
        p = 1.0 / (1.0 + std::exp(-d));
    } else {
        const double e = std::exp(d);
        p = e / (1.0 + e);
    }
    constexpr double lo = std::numeric_limits<double>::denorm_min();
    const double hi = std::nextafter(1.0, 0.0);
    return std::clamp(p, lo, hi);
}

TokenScorePair extract_yes_no(std::span<const TokenScore> scores) {
    if (scores.empty()) fail(ErrorCode::ScoreUnavailable, "completion returned no token scores");
    const TokenScore& first = scores.front();

    std::optional<double> yes;
    std::optional<double> no;
    double listed_mass = 0.0;
    auto visit = [&](const std::string& token, double logprob) {
        listed_mass += std::exp(logprob);
        const std::string t = normalize_text(token);
        if (t == "yes" && !yes) yes = logprob;
        if (t == "no" && !no) no = logprob;
    };
    visit(first.token, first.logprob);
    for (const auto& alt : first.top_alternatives) {
        if (alt.token == first.token && alt.logprob == first.logprob) continue;
        visit(alt.token, alt.logprob);
    }
    if (!yes && !no) fail(ErrorCode::ScoreUnavailable, "neither Yes nor No among the first-position tokens");
    if (!yes || !no) {
        const double rest = std::log(std::max(1.0 - listed_mass, 1e-12));
        if (!yes) yes = rest;
        if (!no) no = rest;
    }
    return {*yes, *no};
}

double confidence(const CompletionClient& client, const PromptTemplate& tmpl, const Content& content, const Tag& tag) {
    if (!client.supports_token_scores())
        fail(ErrorCode::UnsupportedBackend, client.identity() + " does not report token scores");
    CompletionResult reply = client.complete({render_confidence(tmpl, content, tag), 1, true});
    if (!reply.token_scores) fail(ErrorCode::ScoreUnavailable, "completion carried no token scores");
    return confidence_from_scores(extract_yes_no(*reply.token_scores));
}

void sort_by_confidence(std::vector<ScoredAssignment>& scored) {
    std::sort(scored.begin(), scored.end(), [](const ScoredAssignment& a, const ScoredAssignment& b) {
        if (a.confidence != b.confidence) return a.confidence > b.confidence;
        return a.tag < b.tag;
    });
}

std::vector<ScoredAssignment> prune(std::span<const ScoredAssignment> scored, double threshold) {
    std::vector<ScoredAssignment> out;
    for (const auto& s : scored)
        if (s.confidence >= threshold) out.push_back(s);
    sort_by_confidence(out);
    return out;
}

CalibrationResult calibrate(const CompletionClient& client, const PromptTemplate& tmpl, const TagRepository& repo,
                            const Content& content, std::span<const TagId> tags, const CalibrationConfig& config) {
    config.validate();
    for (const auto& t : tags) (void)repo.get(t);

    CalibrationResult result;
    for (const auto& t : tags) {
        try {
            const double conf = confidence(client, tmpl, content, repo.get(t));
            (conf >= config.threshold ? result.kept : result.pruned).push_back({t, conf});
        } catch (const Error& e) {
            result.failures.push_back({t, e.code(), e.what()});
        }
    }
    sort_by_confidence(result.kept);
    sort_by_confidence(result.pruned);
    return result;
}

std::vector<ConfidenceRecord> export_confidence_dataset(const PromptTemplate& tmpl,
                                                        std::span<const ConfidenceExample> examples) {
    std::vector<ConfidenceRecord> out;
    out.reserve(examples.size());
    for (std::size_t i = 0; i < examples.size(); ++i) {
        const auto& ex = examples[i];
        if (ex.label != "Yes" && ex.label != "No")
            fail(ErrorCode::InvalidRecord, "example #" + std::to_string(i + 1) + ": label '" + ex.label +
                                               "' must be \"Yes\" or \"No\"");
        out.push_back({render_confidence(tmpl, ex.content, ex.tag), ex.label});
    }
    return out;
}

void write_confidence_dataset(std::ostream& out, std::span<const ConfidenceRecord> records) {
    for (const auto& r : records) out << dump_line({{"input", r.input}, {"label", r.label}}) << '\n';
}

std::vector<ConfidenceRecord> read_confidence_dataset(std::istream& in) {
    std::vector<ConfidenceRecord> out;
    for_each_jsonl(in, [&](const json& j, std::size_t) {
        ConfidenceRecord r{j.at("input").get<std::string>(), j.at("label").get<std::string>()};
        if (r.label != "Yes" && r.label != "No") fail(ErrorCode::InvalidRecord, "label must be \"Yes\" or \"No\"");
        out.push_back(std::move(r));
    });
    return out;
}

}  // namespace llm4tag
