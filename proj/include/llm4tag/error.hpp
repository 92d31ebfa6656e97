#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace llm4tag {

enum class ErrorCode {
    InvalidInput,
    ParseError,
    DuplicateVertex,
    UnknownVertex,
    InvalidEdge,
    InvalidSnapshot,
    BackendUnavailable,
    UnsupportedBackend,
    ScoreUnavailable,
    GenerationFailed,
    InvalidRecord,
    IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure surfaced by the library. The code is stable and is what
/// callers (CLI exit status, HTTP status mapping) dispatch on.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), message_(message) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }
    /// The message without the code prefix.
    [[nodiscard]] const std::string& message() const noexcept { return message_; }

    /// Transport failures may succeed on retry; everything else is permanent.
    [[nodiscard]] bool retryable() const noexcept { return code_ == ErrorCode::BackendUnavailable; }

private:
    ErrorCode code_;
    std::string message_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace llm4tag
