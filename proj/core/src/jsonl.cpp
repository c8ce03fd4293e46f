#include "memexplain/jsonl.hpp"

#include "memexplain/error.hpp"

#include <sstream>

namespace memexplain {

namespace fs = std::filesystem;

std::vector<json> parse_jsonl(std::string_view content, std::string_view source_name) {
    std::vector<json> rows;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= content.size()) {
        std::size_t end = content.find('\n', pos);
        if (end == std::string_view::npos) end = content.size();
        std::string_view line = content.substr(pos, end - pos);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") != std::string_view::npos) {
            try {
                rows.push_back(json::parse(line));
            } catch (const json::parse_error& e) {
                throw ValidationError(std::string(source_name) + ":" + std::to_string(line_no) +
                                      ": malformed JSON (" + e.what() + ")");
            }
        }
        if (end == content.size()) break;
        pos = end + 1;
    }
    return rows;
}

std::vector<json> read_jsonl(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_jsonl(buffer.str(), path.string());
}

std::string to_jsonl(const std::vector<json>& rows) {
    std::string out;
    for (const auto& row : rows) {
        out += row.dump();
        out += '\n';
    }
    return out;
}

void write_jsonl(const fs::path& path, const std::vector<json>& rows) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeFailure("cannot write " + path.string());
    out << to_jsonl(rows);
}

void write_json(const fs::path& path, const json& value) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeFailure("cannot write " + path.string());
    out << value.dump(2) << '\n';
}

json read_json(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError(path.string() + ": malformed JSON (" + e.what() + ")");
    }
}

JsonlAppender::JsonlAppender(const fs::path& path) : path_(path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    out_.open(path, std::ios::binary | std::ios::app);
    if (!out_) throw RuntimeFailure("cannot open " + path.string() + " for append");
}

void JsonlAppender::append(const json& row) {
    const std::string line = row.dump() + '\n';
    std::lock_guard lock(mutex_);
    out_.write(line.data(), static_cast<std::streamsize>(line.size()));
    out_.flush();
    if (!out_) throw RuntimeFailure("write failed on " + path_.string());
}

}  // namespace memexplain
