#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "floorcast/errors.hpp"

namespace floorcast {

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Writes via a sibling temp file and renames, so readers never observe a
// partially written artifact.
inline void atomic_write_text(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot open file for writing: " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw DataError("write failed: " + tmp.string());
    }
    fs::rename(tmp, target);
}

}  // namespace floorcast
