#include "llm4tag/evalkit.hpp"

#include <algorithm>
#include <array>
#include <fstream>

#include "llm4tag/error.hpp"
#include "llm4tag/jsonl.hpp"
#include "llm4tag/util.hpp"

namespace llm4tag {

void JudgedResult::validate() const {
    if (judgments.has_value() == gold_tag.has_value())
        fail(ErrorCode::InvalidInput, "result '" + content.str() + "' needs exactly one of judgments or gold tag");
    if (judgments && judgments->size() != result_tags.size())
        fail(ErrorCode::InvalidInput, "result '" + content.str() + "' has " + std::to_string(judgments->size()) +
                                          " judgments for " + std::to_string(result_tags.size()) + " tags");
}

void RecallJudgment::validate() const {
    std::set<TagId> seen;
    for (const auto& t : candidate_tags)
        if (!seen.insert(t).second)
            fail(ErrorCode::InvalidInput, "candidates of '" + content.str() + "' repeat tag '" + t.str() + "'");
}

namespace {

void require_k(std::size_t k) {
    if (k < 1) fail(ErrorCode::InvalidInput, "k must be >= 1");
}

}  // namespace

AccuracyReport acc_at_k_report(std::span<const JudgedResult> results, std::size_t k) {
    require_k(k);
    if (results.empty()) fail(ErrorCode::InvalidInput, "no results to evaluate");
    AccuracyReport report;
    double total = 0.0;
    for (const auto& r : results) {
        r.validate();
        if (!r.multi_tag()) fail(ErrorCode::InvalidInput, "Acc@k needs multi-tag judgments ('" + r.content.str() + "')");
        const std::size_t kk = std::min(k, r.result_tags.size());
        if (kk == 0) {
            report.empty_results.push_back(r.content);
            continue;
        }
        std::size_t right = 0;
        for (std::size_t j = 0; j < kk; ++j) right += (*r.judgments)[j] ? 1 : 0;
        total += static_cast<double>(right) / static_cast<double>(kk);
    }
    report.value = total / static_cast<double>(results.size());
    return report;
}

double acc_at_k(std::span<const JudgedResult> results, std::size_t k) { return acc_at_k_report(results, k).value; }

double coverage_at_k(std::span<const JudgedResult> results, std::size_t k) {
    require_k(k);
    if (results.empty()) fail(ErrorCode::InvalidInput, "no results to evaluate");
    std::size_t covered = 0;
    for (const auto& r : results) {
        r.validate();
        covered += r.result_tags.size() >= k ? 1 : 0;
    }
    return static_cast<double>(covered) / static_cast<double>(results.size());
}

PrecisionRecallF1 precision_recall_f1(std::span<const JudgedResult> results) {
    PrecisionRecallF1 m;
    for (const auto& r : results) {
        r.validate();
        if (!r.gold_tag) fail(ErrorCode::InvalidInput, "precision/recall need single-tag results ('" + r.content.str() + "')");
        ++m.total;
        if (r.result_tags.empty()) continue;
        ++m.predicted;
        if (r.result_tags.front() == *r.gold_tag) ++m.correct;
    }
    auto ratio = [&](std::size_t num, std::size_t den) {
        if (den == 0) {
            m.degenerate = true;
            return 0.0;
        }
        return static_cast<double>(num) / static_cast<double>(den);
    };
    m.precision = ratio(m.correct, m.predicted);
    m.recall = ratio(m.correct, m.total);
    if (m.precision + m.recall == 0.0) {
        m.degenerate = true;
        m.f1 = 0.0;
    } else {
        m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    }
    return m;
}

std::span<const std::size_t> default_hit_ks() noexcept {
    static constexpr std::array<std::size_t, 3> ks{1, 2, 3};
    return ks;
}

RecallQuality recall_quality(std::span<const RecallJudgment> judgments, std::span<const std::size_t> ks) {
    if (judgments.empty()) fail(ErrorCode::InvalidInput, "no recall judgments to evaluate");
    for (std::size_t k : ks) require_k(k);
    std::vector<std::size_t> hits;
    hits.reserve(judgments.size());
    for (const auto& j : judgments) {
        j.validate();
        std::size_t h = 0;
        for (const auto& t : j.candidate_tags) h += j.correct_set.contains(t) ? 1 : 0;
        hits.push_back(h);
    }
    const double n = static_cast<double>(judgments.size());
    RecallQuality q;
    double sum = 0.0;
    for (std::size_t h : hits) sum += static_cast<double>(h);
    q.num_right = sum / n;
    for (std::size_t k : ks) {
        const auto count = std::count_if(hits.begin(), hits.end(), [&](std::size_t h) { return h >= k; });
        q.hit_rate[k] = static_cast<double>(count) / n;
    }
    return q;
}

double relative_improvement(std::span<const double> ours, std::span<const double> baseline) {
    if (ours.size() != baseline.size()) fail(ErrorCode::InvalidInput, "metric vectors differ in length");
    if (ours.empty()) fail(ErrorCode::InvalidInput, "no metrics to compare");
    double sum = 0.0;
    for (std::size_t i = 0; i < ours.size(); ++i) {
        if (!(baseline[i] > 0.0)) fail(ErrorCode::InvalidInput, "baseline metrics must be positive");
        if (!(ours[i] > 0.0)) fail(ErrorCode::InvalidInput, "compared metrics must be positive");
        sum += (ours[i] - baseline[i]) / baseline[i];
    }
    return sum / static_cast<double>(ours.size());
}

std::vector<MetricPair> load_metric_pairs(const std::string& path) {
    std::vector<MetricPair> out;
    for_each_jsonl_file(path, [&](const json& j, std::size_t) {
        out.push_back({j.at("metric").get<std::string>(), j.at("ours").get<double>(), j.at("baseline").get<double>()});
    });
    return out;
}

double relative_improvement(std::span<const MetricPair> pairs) {
    std::vector<double> ours;
    std::vector<double> base;
    for (const auto& p : pairs) {
        ours.push_back(p.ours);
        base.push_back(p.baseline);
    }
    return relative_improvement(ours, base);
}

JudgedFile parse_judged(std::istream& in) {
    JudgedFile file;
    auto ids = [](const json& arr) {
        std::vector<TagId> out;
        for (const auto& s : arr) out.emplace_back(s.get<std::string>());
        return out;
    };
    for_each_jsonl(in, [&](const json& j, std::size_t) {
        ContentId content(j.at("content").get<std::string>());
        if (j.contains("judgments")) {
            JudgedResult r{content, ids(j.at("tags")), j.at("judgments").get<std::vector<bool>>(), std::nullopt};
            r.validate();
            file.results.push_back(std::move(r));
        } else if (j.contains("gold")) {
            JudgedResult r{content, {}, std::nullopt, TagId(j.at("gold").get<std::string>())};
            if (auto it = j.find("predicted"); it != j.end() && !it->is_null())
                r.result_tags.emplace_back(it->get<std::string>());
            file.results.push_back(std::move(r));
        } else if (j.contains("candidates")) {
            RecallJudgment r{content, ids(j.at("candidates")), {}};
            for (auto& t : ids(j.at("correct"))) r.correct_set.insert(std::move(t));
            r.validate();
            file.recalls.push_back(std::move(r));
        } else {
            fail(ErrorCode::ParseError, "record matches no judged-result shape");
        }
    });
    return file;
}

JudgedFile load_judged_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open " + path);
    return parse_judged(in);
}

namespace {

std::size_t parse_k(const std::string& metric, std::size_t prefix) {
    const std::string digits = metric.substr(prefix);
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
        fail(ErrorCode::InvalidInput, "metric '" + metric + "' needs a numeric k");
    const std::size_t k = std::stoul(digits);
    require_k(k);
    return k;
}

}  // namespace

nlohmann::json evaluate_metrics(const JudgedFile& file, const std::vector<std::string>& metrics) {
    json report = json::object();
    json flags = json::object();
    std::vector<JudgedResult> multi, single;
    for (const auto& r : file.results) (r.multi_tag() ? multi : single).push_back(r);
    for (const auto& raw : metrics) {
        const std::string m = normalize_text(raw);
        if (m.rfind("acc@", 0) == 0) {
            AccuracyReport a = acc_at_k_report(multi, parse_k(m, 4));
            report[m] = a.value;
            if (!a.empty_results.empty()) {
                json ids = json::array();
                for (const auto& c : a.empty_results) ids.push_back(c.str());
                flags["empty_results"] = std::move(ids);
            }
        } else if (m.rfind("coverage@", 0) == 0) {
            report[m] = coverage_at_k(multi, parse_k(m, 9));
        } else if (m == "prf" || m == "precision" || m == "recall" || m == "f1") {
            PrecisionRecallF1 p = precision_recall_f1(single);
            report["precision"] = p.precision;
            report["recall"] = p.recall;
            report["f1"] = p.f1;
            if (p.degenerate) flags["zero_denominator"] = true;
        } else if (m == "right" || m == "#right") {
            report["#right"] = recall_quality(file.recalls).num_right;
        } else if (m.rfind("hr@", 0) == 0 || m.rfind("hr#", 0) == 0) {
            const std::size_t k = parse_k(m, 3);
            const std::array<std::size_t, 1> ks{k};
            report["hr#" + std::to_string(k)] = recall_quality(file.recalls, ks).hit_rate.at(k);
        } else {
            fail(ErrorCode::InvalidInput, "unknown metric '" + raw + "'");
        }
    }
    report["flags"] = std::move(flags);
    return report;
}

}  // namespace llm4tag
