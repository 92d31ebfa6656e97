#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "llm4tag/core.hpp"

namespace llm4tag {

/// One evaluated content. Multi-tag tasks carry a per-tag judgment for
/// every produced tag; single-tag tasks carry the gold tag instead and use
/// the first result tag (if any) as the prediction.
struct JudgedResult {
    ContentId content;
    std::vector<TagId> result_tags;
    std::optional<std::vector<bool>> judgments;
    std::optional<TagId> gold_tag;

    [[nodiscard]] bool multi_tag() const noexcept { return judgments.has_value(); }
    void validate() const;
};

struct RecallJudgment {
    ContentId content;
    std::vector<TagId> candidate_tags;
    std::set<TagId> correct_set;

    void validate() const;
};

struct AccuracyReport {
    double value = 0.0;
    /// Contents that produced no tags and so contribute zero.
    std::vector<ContentId> empty_results;
};

/// Mean over contents of the right fraction among the first
/// min(k, |T_i|) tags; contents with no tags contribute 0.
AccuracyReport acc_at_k_report(std::span<const JudgedResult> results, std::size_t k);
double acc_at_k(std::span<const JudgedResult> results, std::size_t k);

/// Fraction of contents that kept at least k tags.
double coverage_at_k(std::span<const JudgedResult> results, std::size_t k);

struct PrecisionRecallF1 {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t total = 0;
    std::size_t predicted = 0;
    std::size_t correct = 0;
    /// Set when a zero denominator forced a metric to 0.
    bool degenerate = false;
};

PrecisionRecallF1 precision_recall_f1(std::span<const JudgedResult> results);

struct RecallQuality {
    double num_right = 0.0;
    std::map<std::size_t, double> hit_rate;  ///< k -> HR#k
};

/// The k values reported by default: 1, 2 and 3.
std::span<const std::size_t> default_hit_ks() noexcept;

RecallQuality recall_quality(std::span<const RecallJudgment> judgments,
                             std::span<const std::size_t> ks = default_hit_ks());

/// Mean over paired metrics of (ours - baseline) / baseline.
double relative_improvement(std::span<const double> ours, std::span<const double> baseline);

struct MetricPair {
    std::string metric;
    double ours = 0.0;
    double baseline = 0.0;
};

/// Pairing file: one {"metric": <name>, "ours": <x>, "baseline": <y>} per line.
std::vector<MetricPair> load_metric_pairs(const std::string& path);
double relative_improvement(std::span<const MetricPair> pairs);

struct JudgedFile {
    std::vector<JudgedResult> results;      ///< multi- and single-tag records
    std::vector<RecallJudgment> recalls;    ///< candidate-quality records
};

/// Records are told apart by their fields:
///   {"content","tags":[...],"judgments":[...]}      multi-tag
///   {"content","predicted":<id|null>,"gold":<id>}   single-tag
///   {"content","candidates":[...],"correct":[...]}  recall quality
JudgedFile load_judged_file(const std::string& path);
JudgedFile parse_judged(std::istream& in);

/// Evaluates a metric list such as "acc@1,acc@3,coverage@2,prf,right,hr@3"
/// into a JSON report of metric name -> value plus a "flags" object.
nlohmann::json evaluate_metrics(const JudgedFile& file, const std::vector<std::string>& metrics);

}  // namespace llm4tag
