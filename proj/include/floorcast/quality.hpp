#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "floorcast/csv.hpp"
#include "floorcast/errors.hpp"

namespace floorcast {

// Per-crop pixel summary from an upstream segmentation model, plus the
// window-detection flag. The four class fractions partition the image.
struct SegmentationSummary {
    std::string image_id;
    int crop_index = 0;
    double frac_building = 0.0;
    double frac_vegetation = 0.0;
    double frac_sky = 0.0;
    double frac_other = 0.0;
    double top_rows_building_frac = 0.0;
    double top_rows_vegetation_frac = 0.0;
    bool window_detected = false;
};

enum class QualityReason {
    LowBuilding = 1 << 0,
    HighVegetation = 1 << 1,
    NoWindows = 1 << 2,
    TruncatedTop = 1 << 3,
    OccludedTop = 1 << 4,
};

inline const char* to_string(QualityReason r) {
    switch (r) {
        case QualityReason::LowBuilding: return "LowBuilding";
        case QualityReason::HighVegetation: return "HighVegetation";
        case QualityReason::NoWindows: return "NoWindows";
        case QualityReason::TruncatedTop: return "TruncatedTop";
        default: return "OccludedTop";
    }
}

struct QualityThresholds {
    double min_building = 0.20;    // reject when frac_building < min (strict)
    double max_vegetation = 0.70;  // reject when frac_vegetation > max (strict)
    double top_building = 0.5;     // reject when top band is mostly building
    double top_vegetation = 0.5;   // reject when top band is mostly vegetation
    bool require_windows = true;
};

struct FilterDecision {
    unsigned reasons = 0;  // OR of QualityReason bits; 0 means keep

    bool keep() const { return reasons == 0; }
    bool has(QualityReason r) const { return reasons & static_cast<unsigned>(r); }

    std::vector<QualityReason> reason_list() const {
        std::vector<QualityReason> out;
        for (QualityReason r : {QualityReason::LowBuilding, QualityReason::HighVegetation,
                                QualityReason::NoWindows, QualityReason::TruncatedTop,
                                QualityReason::OccludedTop})
            if (has(r)) out.push_back(r);
        return out;
    }

    std::string reasons_joined() const {
        std::string s;
        for (QualityReason r : reason_list()) {
            if (!s.empty()) s += '|';
            s += to_string(r);
        }
        return s;
    }
};

inline void validate_summary(const SegmentationSummary& s) {
    auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in01(s.frac_building) || !in01(s.frac_vegetation) || !in01(s.frac_sky) ||
        !in01(s.frac_other) || !in01(s.top_rows_building_frac) ||
        !in01(s.top_rows_vegetation_frac))
        throw DataError("InvalidSummary: fraction out of [0,1]");
    const double sum = s.frac_building + s.frac_vegetation + s.frac_sky + s.frac_other;
    if (std::abs(sum - 1.0) > 1e-6)
        throw DataError("InvalidSummary: class fractions sum to " + fmt_double(sum, 8));
}

// Accumulates every triggered rejection reason; Keep iff none trigger.
// All comparisons are strict, so a value exactly at a threshold keeps.
inline FilterDecision evaluate_filters(const SegmentationSummary& s,
                                       const QualityThresholds& t = {}) {
    validate_summary(s);
    FilterDecision d;
    if (s.frac_building < t.min_building)
        d.reasons |= static_cast<unsigned>(QualityReason::LowBuilding);
    if (s.frac_vegetation > t.max_vegetation)
        d.reasons |= static_cast<unsigned>(QualityReason::HighVegetation);
    if (t.require_windows && !s.window_detected)
        d.reasons |= static_cast<unsigned>(QualityReason::NoWindows);
    if (s.top_rows_building_frac > t.top_building)
        d.reasons |= static_cast<unsigned>(QualityReason::TruncatedTop);
    if (s.top_rows_vegetation_frac > t.top_vegetation)
        d.reasons |= static_cast<unsigned>(QualityReason::OccludedTop);
    return d;
}

namespace qualitydetail {

inline SegmentationSummary from_fields(const std::string& image_id, int crop_index,
                                       double b, double v, double sky, double other,
                                       double top_b, double top_v, bool windows) {
    SegmentationSummary s;
    s.image_id = image_id;
    s.crop_index = crop_index;
    s.frac_building = b;
    s.frac_vegetation = v;
    s.frac_sky = sky;
    s.frac_other = other;
    s.top_rows_building_frac = top_b;
    s.top_rows_vegetation_frac = top_v;
    s.window_detected = windows;
    return s;
}

}  // namespace qualitydetail

// CSV columns: image_id,crop_index,frac_building,frac_vegetation,frac_sky,
// frac_other,top_building_frac,top_vegetation_frac,windows_detected
inline std::vector<SegmentationSummary> parse_summaries_csv(const std::string& text) {
    CsvTable t = parse_csv(text);
    const int id = t.require_column("image_id");
    const int ci = t.require_column("crop_index");
    const int b = t.require_column("frac_building");
    const int v = t.require_column("frac_vegetation");
    const int sky = t.require_column("frac_sky");
    const int other = t.require_column("frac_other");
    const int tb = t.require_column("top_building_frac");
    const int tv = t.require_column("top_vegetation_frac");
    const int win = t.require_column("windows_detected");
    std::vector<SegmentationSummary> out;
    for (const auto& row : t.rows) {
        out.push_back(qualitydetail::from_fields(
            row[id], static_cast<int>(parse_int(row[ci], "crop_index")),
            parse_double(row[b], "frac_building"), parse_double(row[v], "frac_vegetation"),
            parse_double(row[sky], "frac_sky"), parse_double(row[other], "frac_other"),
            parse_double(row[tb], "top_building_frac"),
            parse_double(row[tv], "top_vegetation_frac"),
            parse_int(row[win], "windows_detected") != 0));
    }
    return out;
}

inline std::vector<SegmentationSummary> parse_summaries_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw MalformedDocument(std::string("summaries JSON: ") + e.what());
    }
    if (!doc.is_array()) throw MalformedDocument("summaries document must be a JSON array");
    std::vector<SegmentationSummary> out;
    for (const auto& j : doc) {
        out.push_back(qualitydetail::from_fields(
            j.at("image_id").get<std::string>(), j.value("crop_index", 0),
            j.at("frac_building").get<double>(), j.at("frac_vegetation").get<double>(),
            j.at("frac_sky").get<double>(), j.at("frac_other").get<double>(),
            j.value("top_building_frac", 0.0), j.value("top_vegetation_frac", 0.0),
            j.at("windows_detected").get<bool>()));
    }
    return out;
}

// Sniffs JSON ('[' first non-space char) vs CSV.
inline std::vector<SegmentationSummary> parse_summaries_any(const std::string& text) {
    for (char c : text) {
        if (c == ' ' || c == '\n' || c == '\r' || c == '\t') continue;
        return c == '[' ? parse_summaries_json(text) : parse_summaries_csv(text);
    }
    throw MalformedDocument("empty summaries document");
}

inline std::string decisions_to_csv(
    const std::vector<std::pair<SegmentationSummary, FilterDecision>>& decided) {
    std::string out = "image_id,crop_index,decision,reasons\n";
    for (const auto& [s, d] : decided)
        out += csv_join({s.image_id, std::to_string(s.crop_index),
                         d.keep() ? "keep" : "reject", d.reasons_joined()}) +
               "\n";
    return out;
}

}  // namespace floorcast
