#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "floorcast/errors.hpp"
#include "floorcast/geo.hpp"
#include "floorcast/polygon.hpp"

namespace floorcast {

enum class RoofType { flat, nonflat, unknown };
enum class BuildingFunction { residential, commercial, other, unknown };

inline const char* to_string(RoofType t) {
    switch (t) {
        case RoofType::flat: return "flat";
        case RoofType::nonflat: return "nonflat";
        default: return "unknown";
    }
}
inline const char* to_string(BuildingFunction f) {
    switch (f) {
        case BuildingFunction::residential: return "residential";
        case BuildingFunction::commercial: return "commercial";
        case BuildingFunction::other: return "other";
        default: return "unknown";
    }
}

inline RoofType roof_type_from_string(const std::string& s) {
    if (s == "flat") return RoofType::flat;
    if (s == "nonflat" || s == "non-flat" || s == "pitched" || s == "hipped" ||
        s == "gabled")
        return RoofType::nonflat;
    return RoofType::unknown;
}
inline BuildingFunction function_from_string(const std::string& s) {
    if (s == "residential") return BuildingFunction::residential;
    if (s == "commercial") return BuildingFunction::commercial;
    if (s == "other") return BuildingFunction::other;
    return BuildingFunction::unknown;
}

// One building's ground polygon plus LoD2-derived attributes. The exterior
// ring is stored open (no repeated closing vertex), counter-clockwise.
struct Footprint {
    std::string id;
    std::vector<LonLat> exterior;
    std::optional<int> floor_count;   // above-ground storeys, >= 1
    std::optional<double> height_m;   // > 0
    RoofType roof_type = RoofType::unknown;
    BuildingFunction function = BuildingFunction::unknown;
};

struct FeatureIssue {
    size_t feature_index = 0;
    std::string id;
    std::string message;
};

// Polygon area centroid on the tangent plane anchored at the first vertex,
// re-projected to lon/lat.
inline LonLat centroid(const Footprint& fp) {
    if (fp.exterior.size() < 3) throw DataError("DegenerateRing: fewer than 3 vertices");
    const LonLat anchor = fp.exterior.front();
    std::vector<XY> local;
    local.reserve(fp.exterior.size());
    for (const auto& v : fp.exterior) local.push_back(project_local(anchor, v));
    return unproject_local(anchor, ring_centroid(local));
}

// Exact predicate shared by the index and any full scan: does the footprint
// intersect the circle of radius_m about center (tangent plane at center)?
inline bool footprint_within(const Footprint& fp, const LonLat& center, double radius_m) {
    std::vector<XY> local;
    local.reserve(fp.exterior.size());
    for (const auto& v : fp.exterior) local.push_back(project_local(center, v));
    return point_polygon_distance(local, XY{0.0, 0.0}) <= radius_m;
}

// Validates and normalizes a raw exterior ring: closure removed, consecutive
// duplicates dropped, counter-clockwise orientation enforced.
inline std::vector<LonLat> validate_ring(std::vector<LonLat> raw) {
    auto ring = normalize_ring(std::move(raw));
    if (ring.size() < 3) throw DataError("ring has fewer than 3 distinct vertices");
    if (ring_has_duplicate_vertex(ring)) throw DataError("ring revisits a vertex");
    const double area = ring_signed_area_deg(ring);
    if (area == 0.0) throw DataError("ring has zero area");
    if (area < 0.0) std::reverse(ring.begin(), ring.end());
    if (ring_self_intersects_deg(ring)) throw DataError("ring self-intersects");
    return ring;
}

// Write-once spatial store over a uniform lon/lat grid. Every footprint id is
// registered in all cells its bounding box overlaps, so a grid lookup yields
// a superset that the exact predicate then refines.
class FootprintStore {
public:
    explicit FootprintStore(double cell_size_deg = 0.005) : cell_deg_(cell_size_deg) {
        if (cell_size_deg <= 0.0) throw ConfigError("store.cell_size_deg", "must be > 0");
    }

    void insert(Footprint fp) {
        const int idx = static_cast<int>(footprints_.size());
        if (!by_id_.emplace(fp.id, idx).second)
            throw DataError("duplicate footprint id: " + fp.id);
        index_cells(fp, idx);
        footprints_.push_back(std::move(fp));
    }

    size_t size() const { return footprints_.size(); }
    const std::vector<Footprint>& all() const { return footprints_; }
    double cell_size_deg() const { return cell_deg_; }

    const Footprint* find(const std::string& id) const {
        auto it = by_id_.find(id);
        return it == by_id_.end() ? nullptr : &footprints_[it->second];
    }

    // All footprints intersecting the circle of radius_m about center,
    // in insertion order.
    std::vector<const Footprint*> query_buffer(const LonLat& center, double radius_m) const {
        if (radius_m <= 0.0) throw DataError("query radius must be > 0");
        const double dlat = radius_m / kMetersPerDeg;
        const double lat_lo = std::max(-89.9, center.lat - dlat);
        const double lat_hi = std::min(89.9, center.lat + dlat);
        // widest longitude extent over the latitude band
        const double cos_min =
            std::max(1e-6, std::min(std::cos(deg2rad(lat_lo)), std::cos(deg2rad(lat_hi))));
        const double dlon = radius_m / (kMetersPerDeg * cos_min);

        std::vector<int> candidates;
        const int ix0 = cell_of(center.lon - dlon), ix1 = cell_of(center.lon + dlon);
        const int iy0 = cell_of(lat_lo), iy1 = cell_of(lat_hi);
        for (int ix = ix0; ix <= ix1; ++ix) {
            for (int iy = iy0; iy <= iy1; ++iy) {
                auto it = grid_.find(key(ix, iy));
                if (it == grid_.end()) continue;
                candidates.insert(candidates.end(), it->second.begin(), it->second.end());
            }
        }
        std::sort(candidates.begin(), candidates.end());
        candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

        std::vector<const Footprint*> hits;
        for (int idx : candidates)
            if (footprint_within(footprints_[idx], center, radius_m))
                hits.push_back(&footprints_[idx]);
        return hits;
    }

private:
    int cell_of(double deg) const { return static_cast<int>(std::floor(deg / cell_deg_)); }
    static std::int64_t key(int ix, int iy) {
        return (static_cast<std::int64_t>(ix) << 32) ^ static_cast<std::uint32_t>(iy);
    }

    void index_cells(const Footprint& fp, int idx) {
        double lon_min = fp.exterior[0].lon, lon_max = lon_min;
        double lat_min = fp.exterior[0].lat, lat_max = lat_min;
        for (const auto& v : fp.exterior) {
            lon_min = std::min(lon_min, v.lon);
            lon_max = std::max(lon_max, v.lon);
            lat_min = std::min(lat_min, v.lat);
            lat_max = std::max(lat_max, v.lat);
        }
        for (int ix = cell_of(lon_min); ix <= cell_of(lon_max); ++ix)
            for (int iy = cell_of(lat_min); iy <= cell_of(lat_max); ++iy)
                grid_[key(ix, iy)].push_back(idx);
    }

    double cell_deg_;
    std::vector<Footprint> footprints_;
    std::unordered_map<std::string, int> by_id_;
    std::unordered_map<std::int64_t, std::vector<int>> grid_;
};

struct LoadResult {
    FootprintStore store;
    std::vector<FeatureIssue> issues;
    int holes_ignored = 0;
};

namespace fpdetail {

inline std::optional<int> parse_floors(const nlohmann::json& props) {
    for (const char* k : {"floors", "floor_count", "storeysAboveGround"}) {
        auto it = props.find(k);
        if (it == props.end() || it->is_null()) continue;
        if (it->is_number_integer() || it->is_number_unsigned()) {
            int v = it->get<int>();
            if (v >= 1) return v;
        } else if (it->is_number_float()) {
            double v = it->get<double>();
            if (v >= 1.0 && v == std::floor(v)) return static_cast<int>(v);
        }
        throw DataError(std::string("invalid ") + k + " attribute");
    }
    return std::nullopt;
}

inline std::optional<double> parse_height(const nlohmann::json& props) {
    for (const char* k : {"height_m", "height", "measuredHeight"}) {
        auto it = props.find(k);
        if (it == props.end() || it->is_null()) continue;
        if (it->is_number()) {
            double v = it->get<double>();
            if (v > 0.0) return v;
        }
        throw DataError(std::string("invalid ") + k + " attribute");
    }
    return std::nullopt;
}

inline Footprint feature_to_footprint(const nlohmann::json& feature, size_t index,
                                      int& holes_ignored) {
    if (!feature.is_object() || feature.value("type", "") != "Feature")
        throw DataError("not a Feature object");
    const auto& geom = feature.at("geometry");
    if (!geom.is_object() || geom.value("type", "") != "Polygon")
        throw DataError("geometry is not a Polygon");
    const auto& rings = geom.at("coordinates");
    if (!rings.is_array() || rings.empty()) throw DataError("Polygon without rings");
    if (rings.size() > 1) holes_ignored += static_cast<int>(rings.size() - 1);

    std::vector<LonLat> raw;
    for (const auto& c : rings[0]) {
        if (!c.is_array() || c.size() < 2) throw DataError("bad coordinate pair");
        raw.push_back({c[0].get<double>(), c[1].get<double>()});
    }

    Footprint fp;
    fp.exterior = validate_ring(std::move(raw));

    nlohmann::json props = feature.value("properties", nlohmann::json::object());
    if (props.is_null()) props = nlohmann::json::object();
    if (auto it = feature.find("id"); it != feature.end() && !it->is_null())
        fp.id = it->is_string() ? it->get<std::string>() : it->dump();
    else if (auto pit = props.find("id"); pit != props.end() && !pit->is_null())
        fp.id = pit->is_string() ? pit->get<std::string>() : pit->dump();
    else
        fp.id = "feature_" + std::to_string(index);

    fp.floor_count = parse_floors(props);
    fp.height_m = parse_height(props);
    if (auto it = props.find("roof_type"); it != props.end() && it->is_string())
        fp.roof_type = roof_type_from_string(it->get<std::string>());
    if (auto it = props.find("function"); it != props.end() && it->is_string())
        fp.function = function_from_string(it->get<std::string>());
    return fp;
}

}  // namespace fpdetail

// Loads a GeoJSON FeatureCollection of polygons. Invalid features are logged
// and skipped; an unusable (empty) result is an error.
inline LoadResult load_footprints(const std::string& document, double cell_size_deg = 0.005) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(document);
    } catch (const nlohmann::json::parse_error& e) {
        throw MalformedDocument(std::string("GeoJSON: ") + e.what());
    }
    if (!doc.is_object() || doc.value("type", "") != "FeatureCollection")
        throw MalformedDocument("expected a GeoJSON FeatureCollection");
    const auto features = doc.find("features");
    if (features == doc.end() || !features->is_array())
        throw MalformedDocument("FeatureCollection without features array");
    if (features->empty()) throw DataError("EmptyCollection: no features");

    LoadResult result{FootprintStore(cell_size_deg), {}, 0};
    for (size_t i = 0; i < features->size(); ++i) {
        std::string id;
        try {
            Footprint fp =
                fpdetail::feature_to_footprint((*features)[i], i, result.holes_ignored);
            id = fp.id;
            result.store.insert(std::move(fp));
        } catch (const std::exception& e) {
            result.issues.push_back({i, id, e.what()});
        }
    }
    if (result.store.size() == 0)
        throw DataError("EmptyCollection: no valid footprint survived validation");
    return result;
}

// Snapshot format for reuse across subcommands.
inline std::string store_to_json(const FootprintStore& store) {
    nlohmann::json doc;
    doc["format"] = "floorcast-store";
    doc["version"] = 1;
    doc["cell_size_deg"] = store.cell_size_deg();
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& fp : store.all()) {
        nlohmann::json j;
        j["id"] = fp.id;
        nlohmann::json ring = nlohmann::json::array();
        for (const auto& v : fp.exterior) ring.push_back({v.lon, v.lat});
        j["ring"] = std::move(ring);
        if (fp.floor_count) j["floors"] = *fp.floor_count;
        if (fp.height_m) j["height_m"] = *fp.height_m;
        j["roof_type"] = to_string(fp.roof_type);
        j["function"] = to_string(fp.function);
        arr.push_back(std::move(j));
    }
    doc["footprints"] = std::move(arr);
    return doc.dump(2) + "\n";
}

inline FootprintStore store_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw MalformedDocument(std::string("store snapshot: ") + e.what());
    }
    if (doc.value("format", "") != "floorcast-store")
        throw MalformedDocument("not a floorcast store snapshot");
    FootprintStore store(doc.value("cell_size_deg", 0.005));
    for (const auto& j : doc.at("footprints")) {
        Footprint fp;
        fp.id = j.at("id").get<std::string>();
        for (const auto& c : j.at("ring")) fp.exterior.push_back({c[0], c[1]});
        if (j.contains("floors")) fp.floor_count = j["floors"].get<int>();
        if (j.contains("height_m")) fp.height_m = j["height_m"].get<double>();
        fp.roof_type = roof_type_from_string(j.value("roof_type", "unknown"));
        fp.function = function_from_string(j.value("function", "unknown"));
        store.insert(std::move(fp));
    }
    return store;
}

// Sniffs GeoJSON vs snapshot by the "format" tag and loads either.
inline FootprintStore load_store_any(const std::string& text, double cell_size_deg = 0.005) {
    if (text.find("\"floorcast-store\"") != std::string::npos) return store_from_json(text);
    return std::move(load_footprints(text, cell_size_deg).store);
}

}  // namespace floorcast
