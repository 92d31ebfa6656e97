#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>

#include <json.hpp>

namespace llm4tag {

/// Calls `fn(record, line_number)` for each non-blank line of a JSONL
/// stream. Malformed JSON raises ParseError citing the 1-based line; errors
/// thrown by `fn` are rethrown with the line number prepended.
void for_each_jsonl(std::istream& in, const std::function<void(const nlohmann::json&, std::size_t)>& fn);
void for_each_jsonl_file(const std::string& path,
                         const std::function<void(const nlohmann::json&, std::size_t)>& fn);

/// Compact single-line serialization used by every JSONL writer.
std::string dump_line(const nlohmann::json& record);

/// Writes to `path` via a temporary file and rename.
void write_file_atomic(const std::string& path, const std::string& contents);

std::string read_file(const std::string& path);

}  // namespace llm4tag
