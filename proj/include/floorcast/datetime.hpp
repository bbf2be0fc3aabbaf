#pragma once

#include <cstdint>
#include <cstdio>
#include <string>

#include "floorcast/errors.hpp"

namespace floorcast {

// Civil <-> epoch conversions (proleptic Gregorian, UTC). Avoids the C
// library's timezone-dependent mktime/timegm.
namespace detail {

inline std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

}  // namespace detail

// Formats epoch seconds as "YYYY-MM-DDTHH:MM:SSZ".
inline std::string format_iso8601(std::int64_t epoch_s) {
    std::int64_t days = epoch_s / 86400;
    std::int64_t rem = epoch_s % 86400;
    if (rem < 0) {
        rem += 86400;
        days -= 1;
    }
    int y, m, d;
    detail::civil_from_days(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", y, m, d,
                  static_cast<int>(rem / 3600), static_cast<int>(rem / 60 % 60),
                  static_cast<int>(rem % 60));
    return buf;
}

// Parses "YYYY-MM-DD[THH:MM[:SS]][Z|+hh:mm|-hh:mm]" to epoch seconds.
// Fractional seconds are truncated.
inline std::int64_t parse_iso8601(const std::string& s) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, se = 0;
    int off_sign = 0, off_h = 0, off_m = 0;
    const char* p = s.c_str();
    int n = 0;
    if (std::sscanf(p, "%4d-%2d-%2d%n", &y, &mo, &d, &n) != 3)
        throw DataError("bad ISO-8601 timestamp: " + s);
    p += n;
    if (*p == 'T' || *p == ' ') {
        ++p;
        if (std::sscanf(p, "%2d:%2d%n", &h, &mi, &n) != 2)
            throw DataError("bad ISO-8601 timestamp: " + s);
        p += n;
        if (*p == ':') {
            ++p;
            if (std::sscanf(p, "%2d%n", &se, &n) != 1)
                throw DataError("bad ISO-8601 timestamp: " + s);
            p += n;
        }
        if (*p == '.') {  // skip fractional seconds
            ++p;
            while (*p >= '0' && *p <= '9') ++p;
        }
    }
    if (*p == 'Z') {
        ++p;
    } else if (*p == '+' || *p == '-') {
        off_sign = (*p == '+') ? 1 : -1;
        ++p;
        if (std::sscanf(p, "%2d:%2d%n", &off_h, &off_m, &n) != 2)
            throw DataError("bad ISO-8601 timezone: " + s);
        p += n;
    }
    if (*p != '\0') throw DataError("trailing characters in timestamp: " + s);
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || se > 60)
        throw DataError("timestamp field out of range: " + s);
    std::int64_t t = detail::days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + se;
    t -= off_sign * (off_h * 3600 + off_m * 60);
    return t;
}

// Hour of day [0, 24) after applying a fixed UTC offset.
inline int local_hour(std::int64_t epoch_s, int utc_offset_minutes) {
    std::int64_t t = epoch_s + static_cast<std::int64_t>(utc_offset_minutes) * 60;
    std::int64_t sec = t % 86400;
    if (sec < 0) sec += 86400;
    return static_cast<int>(sec / 3600);
}

}  // namespace floorcast
