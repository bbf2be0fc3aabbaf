#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "floorcast/errors.hpp"
#include "floorcast/footprint_store.hpp"
#include "floorcast/geo.hpp"
#include "floorcast/polygon.hpp"

namespace floorcast {

// Horizontal pixel extent of one detected building within a source image.
struct CropBox {
    int x_min_px = 0;
    int x_max_px = 0;
    std::string image_id;
};

struct CameraView {
    LonLat origin;
    double heading_deg = 0.0;  // bearing of the optical axis
    double hfov_deg = 70.0;    // in (0, 180)
    int image_width_px = 0;
};

// Bearing interval subtended by a crop. width_deg is the unwrapped extent;
// start/end are normalized to [0, 360).
struct BearingInterval {
    double start_deg = 0.0;
    double end_deg = 0.0;
    double width_deg = 0.0;
};

// Linear map of pixel columns to compass bearings:
//   bearing(x) = heading + (x / image_width - 0.5) * hfov
inline BearingInterval crop_bearings(const CropBox& crop, const CameraView& cam) {
    if (cam.hfov_deg <= 0.0 || cam.hfov_deg >= 180.0)
        throw DataError("InvalidCrop: hfov must be in (0, 180)");
    if (cam.image_width_px <= 0) throw DataError("InvalidCrop: image width must be positive");
    if (crop.x_min_px < 0 || crop.x_min_px >= crop.x_max_px ||
        crop.x_max_px > cam.image_width_px)
        throw DataError("InvalidCrop: require 0 <= x_min < x_max <= image_width");
    auto bearing_at = [&](int x) {
        return cam.heading_deg +
               (static_cast<double>(x) / cam.image_width_px - 0.5) * cam.hfov_deg;
    };
    BearingInterval out;
    out.start_deg = normalize_bearing(bearing_at(crop.x_min_px));
    out.end_deg = normalize_bearing(bearing_at(crop.x_max_px));
    out.width_deg =
        static_cast<double>(crop.x_max_px - crop.x_min_px) / cam.image_width_px * cam.hfov_deg;
    return out;
}

struct RayHit {
    std::string footprint_id;
    double distance_m = 0.0;
};

// Candidate footprints projected onto the tangent plane at the camera, built
// once per image so each ray is a pure segment sweep.
class LocalScene {
public:
    LocalScene(const LonLat& origin, const std::vector<const Footprint*>& candidates)
        : origin_(origin) {
        for (const Footprint* fp : candidates) {
            Projected p;
            p.fp = fp;
            p.ring.reserve(fp->exterior.size());
            for (const auto& v : fp->exterior) p.ring.push_back(project_local(origin, v));
            polys_.push_back(std::move(p));
        }
        // geocoding jitter can put the camera inside a footprint; such a
        // footprint wins every ray at distance 0
        for (const auto& p : polys_) {
            if (point_in_ring(p.ring, XY{0.0, 0.0})) {
                if (!inside_id_ || p.fp->id < *inside_id_) inside_id_ = p.fp->id;
            }
        }
    }

    const LonLat& origin() const { return origin_; }

    std::optional<RayHit> cast(double bearing_deg, double max_range_m) const {
        if (inside_id_) return RayHit{*inside_id_, 0.0};
        const double rad = deg2rad(bearing_deg);
        const XY dir{std::sin(rad), std::cos(rad)};
        std::optional<RayHit> best;
        for (const auto& p : polys_) {
            const size_t n = p.ring.size();
            for (size_t i = 0; i < n; ++i) {
                const XY a{p.ring[i].x, p.ring[i].y};
                const XY b{p.ring[(i + 1) % n].x, p.ring[(i + 1) % n].y};
                auto t = ray_segment_hit(dir, a, b);
                if (!t || *t > max_range_m) continue;
                if (!best || *t < best->distance_m ||
                    (*t == best->distance_m && p.fp->id < best->footprint_id))
                    best = RayHit{p.fp->id, *t};
            }
        }
        return best;
    }

private:
    struct Projected {
        const Footprint* fp;
        std::vector<XY> ring;
    };
    LonLat origin_;
    std::vector<Projected> polys_;
    std::optional<std::string> inside_id_;
};

// Nearest-boundary hit along one bearing, or nullopt when all segments miss.
inline std::optional<RayHit> cast_ray(const LonLat& origin, double bearing_deg,
                                      double max_range_m,
                                      const std::vector<const Footprint*>& candidates) {
    return LocalScene(origin, candidates).cast(bearing_deg, max_range_m);
}

struct MatchResult {
    std::optional<std::string> footprint_id;
    std::map<std::string, double> votes;  // id -> angular weight (degrees)
    double confidence = 0.0;              // winner weight / FoV width
    int rays_cast = 0;
};

namespace matchdetail {

struct VoteTally {
    struct PerId {
        double weight = 0.0;
        double distance_sum = 0.0;
        int hits = 0;
    };
    std::map<std::string, PerId> by_id;

    void add(const RayHit& hit, double weight) {
        auto& e = by_id[hit.footprint_id];
        e.weight += weight;
        e.distance_sum += hit.distance_m;
        e.hits += 1;
    }

    // Winner by weight; ties by smaller mean hit distance, then smaller id.
    MatchResult finalize(double fov_width_deg, int rays_cast) const {
        MatchResult r;
        r.rays_cast = rays_cast;
        for (const auto& [id, e] : by_id) r.votes[id] = e.weight;
        const PerId* best = nullptr;
        const std::string* best_id = nullptr;
        for (const auto& [id, e] : by_id) {
            if (!best) {
                best = &e;
                best_id = &id;
                continue;
            }
            const double mean_new = e.distance_sum / e.hits;
            const double mean_old = best->distance_sum / best->hits;
            if (e.weight > best->weight ||
                (e.weight == best->weight && mean_new < mean_old)) {
                best = &e;
                best_id = &id;
            }
        }
        if (best && best->weight > 0.0) {
            r.footprint_id = *best_id;
            r.confidence = std::clamp(best->weight / fov_width_deg, 0.0, 1.0);
        }
        return r;
    }
};

}  // namespace matchdetail

// Frequency voting with n_rays equally spaced bearings across the interval.
// Each ray carries weight width/n_rays so vote weights sum to at most the
// FoV width.
inline MatchResult match_dense(const LonLat& origin, const BearingInterval& bearings,
                               const std::vector<const Footprint*>& candidates, int n_rays,
                               double max_range_m) {
    if (n_rays < 2) throw DataError("match_dense requires n_rays >= 2");
    const LocalScene scene(origin, candidates);
    const double w = bearings.width_deg;
    matchdetail::VoteTally tally;
    for (int i = 0; i < n_rays; ++i) {
        const double offset = w * static_cast<double>(i) / (n_rays - 1);
        const double bearing = normalize_bearing(bearings.start_deg + offset);
        if (auto hit = scene.cast(bearing, max_range_m)) tally.add(*hit, w / n_rays);
    }
    return tally.finalize(w, n_rays);
}

// Interval bisection over an eps_deg-aligned bearing grid. An interval whose
// endpoint rays hit the same footprint is attributed to it wholly (a wall
// spanning the FoV costs 2 rays); any other interval splits at its midpoint,
// so footprint boundaries are located to grid precision and buildings hiding
// between two missing endpoint rays are still discovered. Ray casts are
// memoized per grid point: rays_cast counts distinct bearings and never
// exceeds a dense pass at eps_deg spacing.
inline MatchResult match_bisect(const LonLat& origin, const BearingInterval& bearings,
                                const std::vector<const Footprint*>& candidates,
                                double eps_deg, double max_range_m) {
    if (eps_deg <= 0.0) throw DataError("match_bisect requires eps_deg > 0");
    const double w = bearings.width_deg;
    if (candidates.empty()) return matchdetail::VoteTally{}.finalize(w, 0);

    const LocalScene scene(origin, candidates);
    const int n_cells = std::max(1, static_cast<int>(std::ceil(w / eps_deg)));
    const double cell = w / n_cells;

    std::vector<std::optional<RayHit>> memo(n_cells + 1);
    std::vector<bool> cast(n_cells + 1, false);
    int rays = 0;
    matchdetail::VoteTally tally;
    auto eval = [&](int i) -> const std::optional<RayHit>& {
        if (!cast[i]) {
            auto hit =
                scene.cast(normalize_bearing(bearings.start_deg + cell * i), max_range_m);
            if (hit) tally.add(*hit, 0.0);  // distance stats; weight attributed below
            memo[i] = std::move(hit);
            cast[i] = true;
            ++rays;
        }
        return memo[i];
    };
    auto attribute = [&](const std::optional<RayHit>& outcome, double width) {
        if (outcome) tally.by_id[outcome->footprint_id].weight += width;
    };

    std::vector<std::pair<int, int>> stack{{0, n_cells}};
    while (!stack.empty()) {
        auto [lo, hi] = stack.back();
        stack.pop_back();
        const auto& a = eval(lo);
        const auto& b = eval(hi);
        if (a && b && a->footprint_id == b->footprint_id) {
            attribute(a, cell * (hi - lo));
        } else if (hi - lo == 1) {
            attribute(a, cell / 2.0);
            attribute(b, cell / 2.0);
        } else {
            const int mid = lo + (hi - lo) / 2;
            stack.push_back({mid, hi});
            stack.push_back({lo, mid});
        }
    }
    return tally.finalize(w, rays);
}

// Crop boxes as emitted by the detection stage: a JSON array of
// {image_id, x_min_px, x_max_px}. Within one image, crops are numbered by
// order of appearance (crop_index 0, 1, ...).
inline std::vector<CropBox> parse_crops_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw MalformedDocument(std::string("crops JSON: ") + e.what());
    }
    if (!doc.is_array()) throw MalformedDocument("crops document must be a JSON array");
    std::vector<CropBox> out;
    for (const auto& j : doc) {
        CropBox c;
        c.image_id = j.at("image_id").get<std::string>();
        c.x_min_px = j.at("x_min_px").get<int>();
        c.x_max_px = j.at("x_max_px").get<int>();
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace floorcast
