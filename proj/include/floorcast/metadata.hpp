#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "floorcast/csv.hpp"
#include "floorcast/datetime.hpp"
#include "floorcast/errors.hpp"
#include "floorcast/geo.hpp"
#include "floorcast/gpx.hpp"

namespace floorcast {

enum class CameraType { perspective, panorama, unknown };

inline const char* to_string(CameraType t) {
    switch (t) {
        case CameraType::perspective: return "perspective";
        case CameraType::panorama: return "panorama";
        default: return "unknown";
    }
}

inline CameraType camera_type_from_string(const std::string& s) {
    if (s == "perspective") return CameraType::perspective;
    // Mapillary tags 360-degree imagery as spherical/equirectangular.
    if (s == "panorama" || s == "spherical" || s == "equirectangular")
        return CameraType::panorama;
    return CameraType::unknown;
}

// One street-level photo's capture metadata.
struct ImageMeta {
    std::string image_id;
    std::int64_t captured_at = 0;  // epoch seconds, UTC
    double lon = 0.0;
    double lat = 0.0;
    double heading_deg = 0.0;  // [0, 360)
    CameraType camera_type = CameraType::unknown;
    std::optional<double> quality_score;  // [0,1] when present
    int width_px = 0;
    int height_px = 0;

    LonLat position() const { return {lon, lat}; }
};

// Reason a record was dropped during parsing (not fatal for the document).
struct ParseIssue {
    size_t record_index = 0;
    std::string image_id;  // may be empty if the record had none
    std::string message;
};

struct ParseResult {
    std::vector<ImageMeta> metas;
    std::vector<ParseIssue> issues;
};

namespace metadetail {

inline std::optional<double> number_field(const nlohmann::json& rec, const char* key) {
    auto it = rec.find(key);
    if (it == rec.end() || it->is_null()) return std::nullopt;
    if (!it->is_number()) throw DataError(std::string("field is not a number: ") + key);
    return it->get<double>();
}

inline std::int64_t captured_at_field(const nlohmann::json& rec) {
    auto it = rec.find("captured_at");
    if (it == rec.end() || it->is_null()) throw DataError("MissingField(captured_at)");
    if (it->is_string()) return parse_iso8601(it->get<std::string>());
    if (it->is_number_integer() || it->is_number_unsigned() || it->is_number_float()) {
        auto v = static_cast<std::int64_t>(it->get<double>());
        // Mapillary reports epoch milliseconds; anything past year ~5000 in
        // seconds is taken as ms.
        if (std::abs(v) > 100000000000LL) v /= 1000;
        return v;
    }
    throw DataError("bad captured_at type");
}

}  // namespace metadetail

// Parses a JSON array of metadata records. Malformed JSON is fatal; invalid
// individual records are skipped and reported in the issue list.
inline ParseResult parse_metadata(const std::string& document) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(document);
    } catch (const nlohmann::json::parse_error& e) {
        throw MalformedDocument(std::string("metadata JSON: ") + e.what());
    }
    if (!doc.is_array()) throw MalformedDocument("metadata document must be a JSON array");

    ParseResult result;
    for (size_t i = 0; i < doc.size(); ++i) {
        const auto& rec = doc[i];
        std::string id;
        try {
            if (!rec.is_object()) throw DataError("record is not an object");
            if (auto it = rec.find("image_id"); it != rec.end() && it->is_string())
                id = it->get<std::string>();
            else if (it != rec.end() && it->is_number_integer())
                id = std::to_string(it->get<std::int64_t>());
            if (id.empty()) throw DataError("MissingField(image_id)");

            ImageMeta m;
            m.image_id = id;
            m.captured_at = metadetail::captured_at_field(rec);

            auto lon = metadetail::number_field(rec, "lon");
            auto lat = metadetail::number_field(rec, "lat");
            if (!lon) throw DataError("MissingField(lon)");
            if (!lat) throw DataError("MissingField(lat)");
            if (*lon < -180.0 || *lon > 180.0) throw DataError("InvalidValue(lon)");
            if (*lat < -90.0 || *lat > 90.0) throw DataError("InvalidValue(lat)");
            m.lon = *lon;
            m.lat = *lat;

            auto heading = metadetail::number_field(rec, "heading_deg");
            if (!heading) heading = metadetail::number_field(rec, "compass_angle");
            if (!heading) throw DataError("MissingField(heading_deg)");
            if (!std::isfinite(*heading)) throw DataError("InvalidValue(heading_deg)");
            m.heading_deg = normalize_bearing(*heading);

            if (auto it = rec.find("camera_type"); it != rec.end() && it->is_string())
                m.camera_type = camera_type_from_string(it->get<std::string>());

            if (auto q = metadetail::number_field(rec, "quality_score")) {
                if (*q < 0.0 || *q > 1.0) throw DataError("InvalidValue(quality_score)");
                m.quality_score = *q;
            }

            auto w = metadetail::number_field(rec, "width_px");
            if (!w) w = metadetail::number_field(rec, "image_width_px");
            auto h = metadetail::number_field(rec, "height_px");
            if (!h) h = metadetail::number_field(rec, "image_height_px");
            if (!w) throw DataError("MissingField(width_px)");
            if (!h) throw DataError("MissingField(height_px)");
            if (*w <= 0 || *h <= 0) throw DataError("InvalidValue(width_px/height_px)");
            m.width_px = static_cast<int>(*w);
            m.height_px = static_cast<int>(*h);

            result.metas.push_back(std::move(m));
        } catch (const DataError& e) {
            result.issues.push_back({i, id, e.what()});
        }
    }
    return result;
}

enum class RejectReason { Panorama, Night, LowQuality, OutOfBounds };

inline const char* to_string(RejectReason r) {
    switch (r) {
        case RejectReason::Panorama: return "Panorama";
        case RejectReason::Night: return "Night";
        case RejectReason::LowQuality: return "LowQuality";
        default: return "OutOfBounds";
    }
}

struct BoundingBox {
    double lon_min = -180.0;
    double lat_min = -90.0;
    double lon_max = 180.0;
    double lat_max = 90.0;

    bool contains(double lon, double lat) const {
        return lon >= lon_min && lon <= lon_max && lat >= lat_min && lat <= lat_max;
    }
    bool well_ordered() const { return lon_min < lon_max && lat_min < lat_max; }
};

struct FilterConfig {
    double min_quality = 0.5;      // records without a score are kept
    int night_start_hour = 21;     // local hour interval [start, end), may wrap midnight
    int night_end_hour = 6;        // start == end means "never night"
    int utc_offset_minutes = 0;    // local time = UTC + offset
    bool exclude_panoramas = true;
    BoundingBox bounding_box;
};

inline bool is_night_hour(int hour, const FilterConfig& cfg) {
    if (cfg.night_start_hour == cfg.night_end_hour) return false;
    if (cfg.night_start_hour < cfg.night_end_hour)
        return hour >= cfg.night_start_hour && hour < cfg.night_end_hour;
    return hour >= cfg.night_start_hour || hour < cfg.night_end_hour;
}

struct FilterOutcome {
    std::vector<ImageMeta> kept;
    std::vector<std::pair<ImageMeta, RejectReason>> rejected;
};

// Partitions the input: every meta lands in exactly one of kept/rejected.
// A rejected record carries the first matching reason, checked in the order
// Panorama, Night, LowQuality, OutOfBounds.
inline FilterOutcome filter_metadata(const std::vector<ImageMeta>& metas,
                                     const FilterConfig& cfg) {
    if (!cfg.bounding_box.well_ordered())
        throw ConfigError("filter.bounding_box", "min must be < max on both axes");
    FilterOutcome out;
    for (const auto& m : metas) {
        if (cfg.exclude_panoramas && m.camera_type == CameraType::panorama) {
            out.rejected.emplace_back(m, RejectReason::Panorama);
        } else if (is_night_hour(local_hour(m.captured_at, cfg.utc_offset_minutes), cfg)) {
            out.rejected.emplace_back(m, RejectReason::Night);
        } else if (m.quality_score && *m.quality_score < cfg.min_quality) {
            out.rejected.emplace_back(m, RejectReason::LowQuality);
        } else if (!cfg.bounding_box.contains(m.lon, m.lat)) {
            out.rejected.emplace_back(m, RejectReason::OutOfBounds);
        } else {
            out.kept.push_back(m);
        }
    }
    return out;
}

// GPX 1.1 waypoint export, ordered by capture time (ties by image id).
inline std::string export_gpx(std::vector<ImageMeta> metas) {
    if (metas.empty()) throw DataError("EmptyInput: no metadata records to export");
    std::stable_sort(metas.begin(), metas.end(), [](const ImageMeta& a, const ImageMeta& b) {
        if (a.captured_at != b.captured_at) return a.captured_at < b.captured_at;
        return a.image_id < b.image_id;
    });
    std::vector<GpxPoint> pts;
    pts.reserve(metas.size());
    for (const auto& m : metas) pts.push_back({{m.lon, m.lat}, m.captured_at, m.image_id});
    return write_gpx_waypoints(pts);
}

// Serialization of the working set so pipeline stages can hand records on.
inline std::string metas_to_json(const std::vector<ImageMeta>& metas) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& m : metas) {
        nlohmann::json j;
        j["image_id"] = m.image_id;
        j["captured_at"] = format_iso8601(m.captured_at);
        j["lon"] = m.lon;
        j["lat"] = m.lat;
        j["heading_deg"] = m.heading_deg;
        j["camera_type"] = to_string(m.camera_type);
        if (m.quality_score) j["quality_score"] = *m.quality_score;
        j["width_px"] = m.width_px;
        j["height_px"] = m.height_px;
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

inline std::string rejects_to_csv(const ParseResult& parsed, const FilterOutcome& filtered) {
    std::string out = "image_id,reason\n";
    for (const auto& issue : parsed.issues) {
        const std::string id =
            issue.image_id.empty() ? "record[" + std::to_string(issue.record_index) + "]"
                                   : issue.image_id;
        out += csv_join({id, "InvalidRecord:" + issue.message}) + "\n";
    }
    for (const auto& [meta, reason] : filtered.rejected)
        out += csv_join({meta.image_id, to_string(reason)}) + "\n";
    return out;
}

}  // namespace floorcast
