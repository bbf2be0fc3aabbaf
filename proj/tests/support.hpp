#pragma once

#include <string>
#include <vector>

#include "floorcast/footprint_store.hpp"
#include "floorcast/geo.hpp"

namespace testsupport {

inline std::string fixture_path(const std::string& name) {
    return std::string(FLOORCAST_FIXTURE_DIR) + "/" + name;
}

// Munich-ish anchor used by geometry tests.
inline floorcast::LonLat anchor() { return {11.57, 48.14}; }

// Builds a footprint from vertices given in meters relative to `origin`.
inline floorcast::Footprint footprint_from_meters(
    const floorcast::LonLat& origin, const std::vector<floorcast::XY>& ring_m,
    std::string id, std::optional<int> floors = std::nullopt) {
    floorcast::Footprint fp;
    fp.id = std::move(id);
    for (const auto& p : ring_m) fp.exterior.push_back(floorcast::unproject_local(origin, p));
    fp.floor_count = floors;
    return fp;
}

// Axis-aligned square centered at (cx, cy) meters from origin.
inline floorcast::Footprint square_at(const floorcast::LonLat& origin, double cx, double cy,
                                      double half_m, std::string id,
                                      std::optional<int> floors = std::nullopt) {
    return footprint_from_meters(origin,
                                 {{cx - half_m, cy - half_m},
                                  {cx + half_m, cy - half_m},
                                  {cx + half_m, cy + half_m},
                                  {cx - half_m, cy + half_m}},
                                 std::move(id), floors);
}

inline std::vector<const floorcast::Footprint*> pointers(
    const std::vector<floorcast::Footprint>& fps) {
    std::vector<const floorcast::Footprint*> out;
    out.reserve(fps.size());
    for (const auto& f : fps) out.push_back(&f);
    return out;
}

}  // namespace testsupport
