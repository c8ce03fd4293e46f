#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <vector>

namespace memexplain {

using json = nlohmann::json;

/// Parses one JSON object per non-blank line. Throws ValidationError naming
/// the file and line number on malformed input.
std::vector<json> read_jsonl(const std::filesystem::path& path);
std::vector<json> parse_jsonl(std::string_view content, std::string_view source_name = "<memory>");

void write_jsonl(const std::filesystem::path& path, const std::vector<json>& rows);
std::string to_jsonl(const std::vector<json>& rows);

void write_json(const std::filesystem::path& path, const json& value);
json read_json(const std::filesystem::path& path);

/// Append-only JSON-lines writer. Each append is flushed so a killed process
/// leaves every completed line on disk. Appends are serialized internally.
class JsonlAppender {
public:
    explicit JsonlAppender(const std::filesystem::path& path);

    void append(const json& row);

    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
    std::ofstream out_;
    std::mutex mutex_;
};

}  // namespace memexplain
