#pragma once

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "floorcast/errors.hpp"

namespace floorcast {

// Minimal RFC-4180-ish CSV support. Fields containing ',', '"' or a newline
// are quoted on write; quoted fields are unescaped on read.

inline std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

inline std::string csv_join(const std::vector<std::string>& fields) {
    std::string line;
    for (size_t i = 0; i < fields.size(); ++i) {
        if (i) line += ',';
        line += csv_escape(fields[i]);
    }
    return line;
}

inline std::vector<std::string> csv_split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c == '\r') {
            // swallow CR of CRLF
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

// Parses CSV text into rows; the first row is the header. Blank lines skipped.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const {
        for (size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    }

    int require_column(const std::string& name) const {
        int c = column(name);
        if (c < 0) throw DataError("missing CSV column: " + name);
        return c;
    }
};

inline CsvTable parse_csv(const std::string& text) {
    CsvTable t;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        auto fields = csv_split(line);
        if (first) {
            t.header = std::move(fields);
            first = false;
        } else {
            t.rows.push_back(std::move(fields));
        }
    }
    return t;
}

// Fixed-precision double formatting; trailing zeros kept so reruns are
// byte-identical.
inline std::string fmt_double(double v, int precision = 6) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
    // avoid "-0.000000"
    std::string s(buf);
    bool all_zero = true;
    for (char c : s)
        if (c >= '1' && c <= '9') { all_zero = false; break; }
    if (all_zero && s[0] == '-') s.erase(0, 1);
    return s;
}

inline double parse_double(const std::string& s, const std::string& what) {
    try {
        size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw DataError("bad numeric value for " + what + ": '" + s + "'");
    }
}

inline long long parse_int(const std::string& s, const std::string& what) {
    try {
        size_t pos = 0;
        long long v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw DataError("bad integer value for " + what + ": '" + s + "'");
    }
}

}  // namespace floorcast
