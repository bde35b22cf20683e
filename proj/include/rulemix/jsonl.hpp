#pragma once

#include <filesystem>
#include <functional>
#include <string>

#include "json.hpp"

namespace rulemix::jsonl {

using ordered_json = nlohmann::ordered_json;

/// Calls `fn(line_number, parsed)` for every non-empty line. Line numbers are
/// 1-based. Throws ConfigError when the file cannot be opened; parse errors
/// propagate as ConfigError with the line number.
void for_each(const std::filesystem::path& path,
              const std::function<void(std::size_t, const ordered_json&)>& fn);

class Writer {
public:
    explicit Writer(const std::filesystem::path& path);
    ~Writer();
    Writer(const Writer&) = delete;
    Writer& operator=(const Writer&) = delete;

    void write(const ordered_json& obj);
    std::size_t lines_written() const { return lines_; }
    void close();

private:
    struct Impl;
    Impl* impl_;
    std::size_t lines_ = 0;
};

}  // namespace rulemix::jsonl
