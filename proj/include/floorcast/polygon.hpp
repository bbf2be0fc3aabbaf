#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "floorcast/errors.hpp"
#include "floorcast/geo.hpp"

namespace floorcast {

// Ring utilities on plain 2D coordinates. A ring is stored open (first
// vertex not repeated); GeoJSON closure is normalized away on load and
// re-added on write.

inline double cross2(const XY& a, const XY& b) { return a.x * b.y - a.y * b.x; }

template <typename Pt>
inline double ring_signed_area(const std::vector<Pt>& ring) {
    double acc = 0.0;
    const size_t n = ring.size();
    for (size_t i = 0; i < n; ++i) {
        const Pt& p = ring[i];
        const Pt& q = ring[(i + 1) % n];
        acc += p.x * q.y - q.x * p.y;
    }
    return 0.5 * acc;
}

// lon/lat overload: treats lon as x and lat as y, which preserves orientation.
inline double ring_signed_area_deg(const std::vector<LonLat>& ring) {
    double acc = 0.0;
    const size_t n = ring.size();
    for (size_t i = 0; i < n; ++i) {
        const LonLat& p = ring[i];
        const LonLat& q = ring[(i + 1) % n];
        acc += p.lon * q.lat - q.lon * p.lat;
    }
    return 0.5 * acc;
}

// Drops a repeated closing vertex and consecutive duplicates.
inline std::vector<LonLat> normalize_ring(std::vector<LonLat> ring) {
    if (ring.size() >= 2 && ring.front().lon == ring.back().lon &&
        ring.front().lat == ring.back().lat)
        ring.pop_back();
    std::vector<LonLat> out;
    for (const auto& v : ring) {
        if (!out.empty() && out.back().lon == v.lon && out.back().lat == v.lat) continue;
        out.push_back(v);
    }
    return out;
}

inline bool ring_has_duplicate_vertex(const std::vector<LonLat>& ring) {
    for (size_t i = 0; i < ring.size(); ++i)
        for (size_t j = i + 1; j < ring.size(); ++j)
            if (ring[i].lon == ring[j].lon && ring[i].lat == ring[j].lat) return true;
    return false;
}

namespace polydetail {

inline int orient(const XY& a, const XY& b, const XY& c) {
    const double v = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    if (v > 0) return 1;
    if (v < 0) return -1;
    return 0;
}

inline bool on_segment(const XY& a, const XY& b, const XY& p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
           std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

// Any intersection: proper crossing, collinear overlap, or endpoint touch.
inline bool segments_intersect(const XY& a, const XY& b, const XY& c, const XY& d) {
    const int o1 = orient(a, b, c);
    const int o2 = orient(a, b, d);
    const int o3 = orient(c, d, a);
    const int o4 = orient(c, d, b);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(a, b, c)) return true;
    if (o2 == 0 && on_segment(a, b, d)) return true;
    if (o3 == 0 && on_segment(c, d, a)) return true;
    if (o4 == 0 && on_segment(c, d, b)) return true;
    return false;
}

}  // namespace polydetail

// True when two non-adjacent edges of the ring cross or touch. Simple
// polygons admit no such contact; duplicate vertices are checked separately.
template <typename Pt>
inline bool ring_self_intersects(const std::vector<Pt>& ring) {
    const size_t n = ring.size();
    if (n < 4) return false;  // a triangle cannot self-intersect
    auto at = [&](size_t i) { return XY{ring[i % n].x, ring[i % n].y}; };
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            if (j == i + 1 || (i == 0 && j == n - 1)) continue;  // adjacent
            if (polydetail::segments_intersect(at(i), at(i + 1), at(j), at(j + 1)))
                return true;
        }
    }
    return false;
}

inline bool ring_self_intersects_deg(const std::vector<LonLat>& ring) {
    std::vector<XY> xs;
    xs.reserve(ring.size());
    for (const auto& p : ring) xs.push_back({p.lon, p.lat});
    return ring_self_intersects(xs);
}

// Even-odd point-in-polygon test on an open ring.
inline bool point_in_ring(const std::vector<XY>& ring, const XY& p) {
    bool inside = false;
    const size_t n = ring.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        const XY& a = ring[i];
        const XY& b = ring[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
            if (p.x < x) inside = !inside;
        }
    }
    return inside;
}

inline double point_segment_distance(const XY& p, const XY& a, const XY& b) {
    const double abx = b.x - a.x, aby = b.y - a.y;
    const double len2 = abx * abx + aby * aby;
    double t = 0.0;
    if (len2 > 0.0) t = ((p.x - a.x) * abx + (p.y - a.y) * aby) / len2;
    t = std::clamp(t, 0.0, 1.0);
    const double dx = p.x - (a.x + t * abx), dy = p.y - (a.y + t * aby);
    return std::sqrt(dx * dx + dy * dy);
}

// Distance from a point to a polygon: 0 when inside, else nearest edge.
inline double point_polygon_distance(const std::vector<XY>& ring, const XY& p) {
    if (point_in_ring(ring, p)) return 0.0;
    double best = std::numeric_limits<double>::infinity();
    const size_t n = ring.size();
    for (size_t i = 0; i < n; ++i)
        best = std::min(best, point_segment_distance(p, ring[i], ring[(i + 1) % n]));
    return best;
}

// Area centroid by the shoelace formula. Throws on (near-)zero area.
inline XY ring_centroid(const std::vector<XY>& ring) {
    double a2 = 0.0, cx = 0.0, cy = 0.0;
    const size_t n = ring.size();
    for (size_t i = 0; i < n; ++i) {
        const XY& p = ring[i];
        const XY& q = ring[(i + 1) % n];
        const double w = p.x * q.y - q.x * p.y;
        a2 += w;
        cx += (p.x + q.x) * w;
        cy += (p.y + q.y) * w;
    }
    if (std::abs(a2) < 1e-12) throw DataError("DegenerateRing: zero area");
    return {cx / (3.0 * a2), cy / (3.0 * a2)};
}

// First positive intersection of ray (origin 0, unit direction d) with
// segment a->b; returns the distance, or nullopt. Collinear grazing misses.
inline std::optional<double> ray_segment_hit(const XY& dir, const XY& a, const XY& b) {
    const XY s{b.x - a.x, b.y - a.y};
    const double det = cross2(s, dir);
    if (det == 0.0) return std::nullopt;  // parallel or collinear
    // origin + t*dir == a + u*s
    const double t = cross2(s, XY{a.x, a.y}) / det;
    const double u = cross2(dir, XY{a.x, a.y}) / det;
    if (t <= 0.0 || u < 0.0 || u > 1.0) return std::nullopt;
    return t;
}

}  // namespace floorcast
