#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "floorcast/csv.hpp"
#include "floorcast/errors.hpp"
#include "floorcast/footprint_store.hpp"

namespace floorcast {

enum class ImageSource { mapillary, self_captured };

inline const char* to_string(ImageSource s) {
    return s == ImageSource::mapillary ? "mapillary" : "self_captured";
}

inline ImageSource source_from_string(const std::string& s) {
    if (s == "mapillary") return ImageSource::mapillary;
    if (s == "self_captured" || s == "self-captured") return ImageSource::self_captured;
    throw DataError("unknown image source: " + s);
}

// One labeled training image in the assembled dataset.
struct DatasetRecord {
    std::string image_id;
    std::string footprint_id;
    int floor_count = 1;  // >= 1
    ImageSource source = ImageSource::mapillary;
    std::optional<double> height_m;
};

// CSV columns: image_id,footprint_id,floor_count,source[,height_m]
inline std::vector<DatasetRecord> parse_records_csv(const std::string& text) {
    CsvTable t = parse_csv(text);
    const int id = t.require_column("image_id");
    const int fid = t.require_column("footprint_id");
    const int fc = t.require_column("floor_count");
    const int src = t.require_column("source");
    const int h = t.column("height_m");
    std::vector<DatasetRecord> out;
    for (const auto& row : t.rows) {
        DatasetRecord r;
        r.image_id = row[id];
        r.footprint_id = row[fid];
        r.floor_count = static_cast<int>(parse_int(row[fc], "floor_count"));
        if (r.floor_count < 1) throw DataError("floor_count must be >= 1");
        r.source = source_from_string(row[src]);
        if (h >= 0 && !row[h].empty()) r.height_m = parse_double(row[h], "height_m");
        out.push_back(std::move(r));
    }
    return out;
}

// Per-floor image counts split by source. Floors above 18 are pooled into a
// "19+" bucket so rare towers stay visible without extending the class range.
struct FloorHistogram {
    struct Row {
        int total = 0;
        int mapillary = 0;
        int self_captured = 0;
    };
    std::map<int, Row> rows;  // key: floor 1..18, or 19 meaning "19+"
    Row totals;

    static constexpr int kOverflowKey = 19;
};

inline FloorHistogram floor_histogram(const std::vector<DatasetRecord>& records) {
    if (records.empty()) throw DataError("EmptyInput: no dataset records");
    FloorHistogram h;
    for (const auto& r : records) {
        const int key = r.floor_count > 18 ? FloorHistogram::kOverflowKey : r.floor_count;
        auto& row = h.rows[key];
        row.total += 1;
        h.totals.total += 1;
        if (r.source == ImageSource::mapillary) {
            row.mapillary += 1;
            h.totals.mapillary += 1;
        } else {
            row.self_captured += 1;
            h.totals.self_captured += 1;
        }
    }
    return h;
}

inline std::string histogram_to_csv(const FloorHistogram& h) {
    std::string out = "floor_count,total,mapillary,self_captured\n";
    for (const auto& [floor, row] : h.rows) {
        const std::string label =
            floor == FloorHistogram::kOverflowKey ? "19+" : std::to_string(floor);
        out += csv_join({label, std::to_string(row.total), std::to_string(row.mapillary),
                         std::to_string(row.self_captured)}) +
               "\n";
    }
    out += csv_join({"total", std::to_string(h.totals.total),
                     std::to_string(h.totals.mapillary),
                     std::to_string(h.totals.self_captured)}) +
           "\n";
    return out;
}

struct HeightFloorExport {
    std::string csv;
    int skipped = 0;  // footprints missing floors or height
};

// One row per footprint carrying both a floor count and a height.
inline HeightFloorExport height_floor_export(const std::vector<Footprint>& footprints) {
    HeightFloorExport out;
    out.csv = "floor_count,height_m,roof_type,function\n";
    for (const auto& fp : footprints) {
        if (!fp.floor_count || !fp.height_m) {
            ++out.skipped;
            continue;
        }
        out.csv += csv_join({std::to_string(*fp.floor_count), fmt_double(*fp.height_m, 2),
                             to_string(fp.roof_type), to_string(fp.function)}) +
                   "\n";
    }
    return out;
}

}  // namespace floorcast
