#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace llm4tag {

inline constexpr std::uint64_t kFnvOffsetBasis = 14695981039346656037ULL;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

/// 64-bit FNV-1a over raw bytes, starting from `basis`.
constexpr std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = kFnvOffsetBasis) noexcept {
    std::uint64_t h = basis;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= kFnvPrime;
    }
    return h;
}

std::string to_hex(std::uint64_t value);

std::string trim(std::string_view text);

/// ASCII lowercase, whitespace runs collapsed to one space, trimmed.
std::string normalize_text(std::string_view text);

bool iequals_trimmed(std::string_view a, std::string_view b);

}  // namespace llm4tag
