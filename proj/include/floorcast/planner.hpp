#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "floorcast/csv.hpp"
#include "floorcast/errors.hpp"
#include "floorcast/footprint_store.hpp"
#include "floorcast/geo.hpp"
#include "floorcast/gpx.hpp"

namespace floorcast {

// Required number of buildings per floor category.
struct Quota {
    std::map<int, int> per_floor;  // floor_count -> building count
    int photos_per_building = 3;
};

inline Quota parse_quota_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw MalformedDocument(std::string("quota JSON: ") + e.what());
    }
    Quota q;
    q.photos_per_building = doc.value("photos_per_building", 3);
    for (const auto& [key, val] : doc.at("quota").items()) {
        const int floor = static_cast<int>(parse_int(key, "quota floor key"));
        const int count = val.get<int>();
        if (count < 0) throw DataError("quota count must be >= 0 for floor " + key);
        q.per_floor[floor] = count;
    }
    return q;
}

struct Shortfall {
    int floor_count = 0;
    int requested = 0;
    int selected = 0;
};

struct SelectionResult {
    std::vector<const Footprint*> targets;
    std::vector<Shortfall> shortfalls;  // one row per requested category
};

namespace plandetail {

// Portable Fisher-Yates; std::shuffle is implementation-defined, which would
// break cross-platform reproducibility of seeded runs.
template <typename T>
inline void seeded_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
    for (size_t i = v.size(); i > 1; --i) {
        const size_t j = static_cast<size_t>(rng() % i);
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace plandetail

// Draws min(quota, available) buildings per floor category uniformly without
// replacement. Categories above 18 floors are never selectable. Deterministic
// for a fixed seed.
inline SelectionResult select_targets(const FootprintStore& store, const Quota& quota,
                                      std::uint64_t seed) {
    std::map<int, std::vector<const Footprint*>> by_floor;
    for (const auto& fp : store.all()) {
        if (!fp.floor_count) continue;
        if (*fp.floor_count > 18) continue;  // extremely rare; excluded from selection
        by_floor[*fp.floor_count].push_back(&fp);
    }
    std::mt19937_64 rng(seed);
    SelectionResult result;
    for (const auto& [floor, requested] : quota.per_floor) {
        auto it = by_floor.find(floor);
        std::vector<const Footprint*> pool = it == by_floor.end()
                                                 ? std::vector<const Footprint*>{}
                                                 : it->second;
        std::sort(pool.begin(), pool.end(),
                  [](const Footprint* a, const Footprint* b) { return a->id < b->id; });
        plandetail::seeded_shuffle(pool, rng);
        const int take = std::min<int>(requested, static_cast<int>(pool.size()));
        for (int i = 0; i < take; ++i) result.targets.push_back(pool[i]);
        result.shortfalls.push_back({floor, requested, take});
    }
    return result;
}

// Symmetric pairwise great-circle distances.
inline std::vector<std::vector<double>> build_distance_matrix(
    const std::vector<LonLat>& points) {
    const size_t n = points.size();
    std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j)
            m[i][j] = m[j][i] = haversine_m(points[i], points[j]);
    return m;
}

inline void validate_matrix(const std::vector<std::vector<double>>& m) {
    const size_t n = m.size();
    if (n < 2) throw DataError("InvalidMatrix: need at least 2 points");
    for (size_t i = 0; i < n; ++i) {
        if (m[i].size() != n) throw DataError("InvalidMatrix: not square");
        if (std::abs(m[i][i]) > 1e-9) throw DataError("InvalidMatrix: nonzero diagonal");
        for (size_t j = 0; j < n; ++j) {
            if (m[i][j] < 0.0) throw DataError("InvalidMatrix: negative entry");
            if (std::abs(m[i][j] - m[j][i]) > 1e-9)
                throw DataError("InvalidMatrix: asymmetric beyond 1e-9");
        }
    }
}

inline double tour_length(const std::vector<std::vector<double>>& m,
                          const std::vector<int>& tour, bool closed = false) {
    double len = 0.0;
    for (size_t i = 1; i < tour.size(); ++i) len += m[tour[i - 1]][tour[i]];
    if (closed && tour.size() > 1) len += m[tour.back()][tour.front()];
    return len;
}

inline std::vector<int> nearest_neighbor_tour(const std::vector<std::vector<double>>& m) {
    const size_t n = m.size();
    std::vector<int> tour;
    tour.reserve(n);
    std::vector<bool> used(n, false);
    int current = 0;
    tour.push_back(0);
    used[0] = true;
    for (size_t step = 1; step < n; ++step) {
        int best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (size_t j = 0; j < n; ++j) {
            if (!used[j] && m[current][j] < best_d) {
                best_d = m[current][j];
                best = static_cast<int>(j);
            }
        }
        tour.push_back(best);
        used[best] = true;
        current = best;
    }
    return tour;
}

// First-improvement 2-opt. Reversing tour[i..k] replaces the edges entering i
// and leaving k; for an open path a boundary reversal (i == 0 or k == n-1)
// changes a single edge and may move the start or end point.
inline std::vector<int> two_opt(const std::vector<std::vector<double>>& m,
                                std::vector<int> tour, bool closed,
                                int max_passes = 10000) {
    const int n = static_cast<int>(tour.size());
    if (n < 3) return tour;
    for (int pass = 0; pass < max_passes; ++pass) {
        bool improved = false;
        const int i_lo = closed ? 1 : 0;
        for (int i = i_lo; i + 1 < n && !improved; ++i) {
            for (int k = i + 1; k < n; ++k) {
                if (!closed && i == 0 && k == n - 1) continue;  // plain reversal, no-op
                double removed = 0.0, added = 0.0;
                if (closed) {
                    const int before = tour[(i - 1 + n) % n];
                    const int after = tour[(k + 1) % n];
                    removed = m[before][tour[i]] + m[tour[k]][after];
                    added = m[before][tour[k]] + m[tour[i]][after];
                } else {
                    if (i > 0) {
                        removed += m[tour[i - 1]][tour[i]];
                        added += m[tour[i - 1]][tour[k]];
                    }
                    if (k < n - 1) {
                        removed += m[tour[k]][tour[k + 1]];
                        added += m[tour[i]][tour[k + 1]];
                    }
                }
                if (added < removed - 1e-9) {
                    std::reverse(tour.begin() + i, tour.begin() + k + 1);
                    improved = true;
                    break;
                }
            }
        }
        if (!improved) break;
    }
    return tour;
}

// Open-path tour: nearest neighbor from index 0, then 2-opt until no
// improving swap remains.
inline std::vector<int> solve_tsp(const std::vector<std::vector<double>>& matrix,
                                  bool closed = false) {
    validate_matrix(matrix);
    return two_opt(matrix, nearest_neighbor_tour(matrix), closed);
}

struct CapturePlan {
    struct Stop {
        std::string footprint_id;
        LonLat point;
    };
    std::vector<Stop> stops;  // visit order
    double total_distance_m = 0.0;
    int photos_per_building = 3;
    bool closed = false;
};

// Orders the selected buildings by centroid TSP.
inline CapturePlan make_plan(const std::vector<const Footprint*>& targets,
                             int photos_per_building = 3, bool closed = false) {
    if (targets.empty()) throw DataError("EmptyPlan: no targets selected");
    CapturePlan plan;
    plan.photos_per_building = photos_per_building;
    plan.closed = closed;

    std::vector<LonLat> centroids;
    centroids.reserve(targets.size());
    for (const auto* fp : targets) centroids.push_back(centroid(*fp));

    std::vector<int> order;
    if (targets.size() == 1) {
        order = {0};
    } else {
        order = solve_tsp(build_distance_matrix(centroids), closed);
    }
    for (int idx : order) plan.stops.push_back({targets[idx]->id, centroids[idx]});
    for (size_t i = 1; i < plan.stops.size(); ++i)
        plan.total_distance_m += haversine_m(plan.stops[i - 1].point, plan.stops[i].point);
    if (closed && plan.stops.size() > 1)
        plan.total_distance_m += haversine_m(plan.stops.back().point, plan.stops.front().point);
    return plan;
}

inline std::string route_to_gpx(const CapturePlan& plan) {
    if (plan.stops.empty()) throw DataError("EmptyPlan");
    std::vector<GpxPoint> pts;
    pts.reserve(plan.stops.size());
    for (const auto& s : plan.stops) pts.push_back({s.point, std::nullopt, s.footprint_id});
    return write_gpx_route("capture plan", pts);
}

// Legs CSV; the cumulative column ends at total_distance_m.
inline std::string route_to_csv(const CapturePlan& plan) {
    if (plan.stops.empty()) throw DataError("EmptyPlan");
    std::string out = "order,footprint_id,lon,lat,leg_m,cumulative_m\n";
    double cum = 0.0;
    for (size_t i = 0; i < plan.stops.size(); ++i) {
        const auto& s = plan.stops[i];
        const double leg = i == 0 ? 0.0 : haversine_m(plan.stops[i - 1].point, s.point);
        cum += leg;
        out += csv_join({std::to_string(i), s.footprint_id, fmt_double(s.point.lon, 7),
                         fmt_double(s.point.lat, 7), fmt_double(leg, 3), fmt_double(cum, 3)}) +
               "\n";
    }
    if (plan.closed && plan.stops.size() > 1) {
        const double leg = haversine_m(plan.stops.back().point, plan.stops.front().point);
        cum += leg;
        out += csv_join({std::to_string(plan.stops.size()), plan.stops.front().footprint_id,
                         fmt_double(plan.stops.front().point.lon, 7),
                         fmt_double(plan.stops.front().point.lat, 7), fmt_double(leg, 3),
                         fmt_double(cum, 3)}) +
               "\n";
    }
    return out;
}

inline std::string shortfalls_to_csv(const std::vector<Shortfall>& shortfalls) {
    std::string out = "floor_count,requested,selected,shortfall\n";
    for (const auto& s : shortfalls)
        out += csv_join({std::to_string(s.floor_count), std::to_string(s.requested),
                         std::to_string(s.selected), std::to_string(s.requested - s.selected)}) +
               "\n";
    return out;
}

}  // namespace floorcast
