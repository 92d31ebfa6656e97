#include "llm4tag/util.hpp"

#include <cctype>
#include <cstdio>

#include "llm4tag/error.hpp"

namespace llm4tag {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidInput: return "InvalidInput";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::DuplicateVertex: return "DuplicateVertex";
        case ErrorCode::UnknownVertex: return "UnknownVertex";
        case ErrorCode::InvalidEdge: return "InvalidEdge";
        case ErrorCode::InvalidSnapshot: return "InvalidSnapshot";
        case ErrorCode::BackendUnavailable: return "BackendUnavailable";
        case ErrorCode::UnsupportedBackend: return "UnsupportedBackend";
        case ErrorCode::ScoreUnavailable: return "ScoreUnavailable";
        case ErrorCode::GenerationFailed: return "GenerationFailed";
        case ErrorCode::InvalidRecord: return "InvalidRecord";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

std::string to_hex(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

namespace {
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
}  // namespace

std::string trim(std::string_view text) {
    std::size_t begin = 0;
    std::size_t end = text.size();
    while (begin < end && is_space(text[begin])) ++begin;
    while (end > begin && is_space(text[end - 1])) --end;
    return std::string(text.substr(begin, end - begin));
}

std::string normalize_text(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (char c : text) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

bool iequals_trimmed(std::string_view a, std::string_view b) {
    return normalize_text(a) == normalize_text(b);
}

}  // namespace llm4tag
