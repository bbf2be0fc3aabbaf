#pragma once

#include <chrono>
#include <iostream>
#include <mutex>
#include <string>

#include "floorcast/datetime.hpp"

namespace floorcast {

// Structured one-line logs to stderr: timestamp, module, level, message.
// Data outputs go to files only, so log timing never affects artifacts.
namespace logdetail {
inline std::mutex& mu() {
    static std::mutex m;
    return m;
}
}  // namespace logdetail

inline void log_line(const char* level, const std::string& module, const std::string& msg) {
    const auto now = std::chrono::system_clock::now();
    const std::int64_t s =
        std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
    std::lock_guard<std::mutex> lock(logdetail::mu());
    std::cerr << format_iso8601(s) << " [" << module << "] " << level << " " << msg << "\n";
}

inline void log_info(const std::string& module, const std::string& msg) {
    log_line("INFO", module, msg);
}
inline void log_warn(const std::string& module, const std::string& msg) {
    log_line("WARN", module, msg);
}
inline void log_error(const std::string& module, const std::string& msg) {
    log_line("ERROR", module, msg);
}

}  // namespace floorcast
