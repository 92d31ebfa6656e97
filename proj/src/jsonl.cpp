#include "llm4tag/jsonl.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "llm4tag/error.hpp"

namespace llm4tag {

void for_each_jsonl(std::istream& in, const std::function<void(const nlohmann::json&, std::size_t)>& fn) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json record;
        try {
            record = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + e.what());
        }
        try {
            fn(record, line_no);
        } catch (const Error& e) {
            throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.message());
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + e.what());
        }
    }
}

void for_each_jsonl_file(const std::string& path,
                         const std::function<void(const nlohmann::json&, std::size_t)>& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open " + path);
    for_each_jsonl(in, fn);
}

std::string dump_line(const nlohmann::json& record) {
    return record.dump(-1, ' ', false, nlohmann::json::error_handler_t::strict);
}

void write_file_atomic(const std::string& path, const std::string& contents) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorCode::IoError, "cannot write " + tmp);
        out << contents;
        if (!out.flush()) fail(ErrorCode::IoError, "short write to " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) fail(ErrorCode::IoError, "cannot rename " + tmp + " to " + path + ": " + ec.message());
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace llm4tag
