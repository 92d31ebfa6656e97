#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "llm4tag/completion.hpp"
#include "llm4tag/core.hpp"
#include "llm4tag/genkit.hpp"

namespace llm4tag {

struct TokenScorePair {
    double yes_logprob = 0.0;
    double no_logprob = 0.0;
};

struct CalibrationConfig {
    double threshold = 0.5;

    void validate() const;
};

/// Relevance-judgment prompt for one (content, tag) pair, asking for a
/// single Yes/No token.
std::string render_confidence(const PromptTemplate& tmpl, const Content& content, const Tag& tag);

/// Two-way softmax over the Yes/No scores, evaluated as a logistic of the
/// difference so it never overflows. Clamped into the open interval (0, 1).
double confidence_from_scores(double yes_logprob, double no_logprob) noexcept;
inline double confidence_from_scores(const TokenScorePair& pair) noexcept {
    return confidence_from_scores(pair.yes_logprob, pair.no_logprob);
}

/// Finds the Yes and No scores at the first answer position, matching
/// token strings case-insensitively after trimming and consulting the top
/// alternatives when the sampled token is neither. If only one of the two
/// appears, the other is assigned the log of the unlisted probability mass
/// (floored at 1e-12). Neither present raises ScoreUnavailable.
TokenScorePair extract_yes_no(std::span<const TokenScore> scores);

/// Queries the client with the confidence prompt and applies the softmax.
/// UnsupportedBackend if the client cannot report token scores.
double confidence(const CompletionClient& client, const PromptTemplate& tmpl, const Content& content, const Tag& tag);

struct ScoredAssignment {
    TagId tag;
    double confidence = 0.0;

    friend bool operator==(const ScoredAssignment&, const ScoredAssignment&) = default;
};

struct ScoringFailure {
    TagId tag;
    ErrorCode code;
    std::string message;
};

struct CalibrationResult {
    std::vector<ScoredAssignment> kept;     ///< confidence >= threshold, descending
    std::vector<ScoredAssignment> pruned;   ///< scored but under threshold
    std::vector<ScoringFailure> failures;   ///< dropped, never kept
};

/// Ranks survivors by confidence descending, ties by tag id.
void sort_by_confidence(std::vector<ScoredAssignment>& scored);

/// Scores every tag, keeps those at or above the threshold. A tag whose
/// scoring fails is reported in `failures` and dropped. Unknown tags raise
/// UnknownVertex before any client call.
CalibrationResult calibrate(const CompletionClient& client, const PromptTemplate& tmpl, const TagRepository& repo,
                            const Content& content, std::span<const TagId> tags, const CalibrationConfig& config);

/// Re-applies a threshold to already-scored tags.
std::vector<ScoredAssignment> prune(std::span<const ScoredAssignment> scored, double threshold);

struct ConfidenceExample {
    Content content;
    Tag tag;
    std::string label;
};

struct ConfidenceRecord {
    std::string input;
    std::string label;

    friend bool operator==(const ConfidenceRecord&, const ConfidenceRecord&) = default;
};

/// Labels must be exactly "Yes" or "No"; anything else raises InvalidRecord.
std::vector<ConfidenceRecord> export_confidence_dataset(const PromptTemplate& tmpl,
                                                        std::span<const ConfidenceExample> examples);
void write_confidence_dataset(std::ostream& out, std::span<const ConfidenceRecord> records);
std::vector<ConfidenceRecord> read_confidence_dataset(std::istream& in);

}  // namespace llm4tag
