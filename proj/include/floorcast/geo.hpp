#pragma once

#include <cmath>

namespace floorcast {

inline constexpr double kEarthRadiusM = 6371000.0;
inline constexpr double kPi = 3.14159265358979323846;
// Meters per degree of latitude (and of longitude at the equator).
inline constexpr double kMetersPerDeg = kPi / 180.0 * kEarthRadiusM;

struct LonLat {
    double lon = 0.0;
    double lat = 0.0;
};

struct XY {
    double x = 0.0;
    double y = 0.0;
};

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

// Normalizes any bearing to [0, 360).
inline double normalize_bearing(double deg) {
    double b = std::fmod(deg, 360.0);
    if (b < 0.0) b += 360.0;
    if (b == 360.0) b = 0.0;  // fmod can return -0.0 -> 360 after the add
    return b;
}

// Equirectangular tangent-plane projection about `origin`.
// x grows east, y grows north, both in meters.
inline XY project_local(const LonLat& origin, const LonLat& p) {
    return {(p.lon - origin.lon) * std::cos(deg2rad(origin.lat)) * kMetersPerDeg,
            (p.lat - origin.lat) * kMetersPerDeg};
}

inline LonLat unproject_local(const LonLat& origin, const XY& p) {
    return {origin.lon + p.x / (std::cos(deg2rad(origin.lat)) * kMetersPerDeg),
            origin.lat + p.y / kMetersPerDeg};
}

// Great-circle distance in meters.
inline double haversine_m(const LonLat& a, const LonLat& b) {
    const double lat1 = deg2rad(a.lat);
    const double lat2 = deg2rad(b.lat);
    const double dlat = lat2 - lat1;
    const double dlon = deg2rad(b.lon - a.lon);
    const double s1 = std::sin(dlat / 2.0);
    const double s2 = std::sin(dlon / 2.0);
    const double h = s1 * s1 + std::cos(lat1) * std::cos(lat2) * s2 * s2;
    return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

}  // namespace floorcast
