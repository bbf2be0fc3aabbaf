#pragma once

#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "floorcast/errors.hpp"
#include "floorcast/metadata.hpp"
#include "floorcast/model.hpp"
#include "floorcast/quality.hpp"

namespace floorcast {

struct MatcherParams {
    double hfov_deg = 70.0;        // used when camera metadata lacks a FoV
    double buffer_radius_m = 100.0;
    double max_range_m = 100.0;
    double eps_deg = 0.5;
    double cell_size_deg = 0.005;
};

// Everything a pipeline run needs, file paths plus per-module knobs. Loaded
// from an INI-style file; any CLI flag overrides its field.
struct PipelineConfig {
    std::string footprints_path;
    std::string metadata_path;
    std::string crops_path;
    std::string summaries_path;
    std::uint64_t seed = 42;

    FilterConfig filter;
    MatcherParams matcher;
    QualityThresholds quality;
    ModelConfig train;
};

namespace configdetail {

inline std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

struct IniData {
    // section -> key -> value; top-level keys live under ""
    std::map<std::string, std::map<std::string, std::string>> sections;
};

inline IniData parse_ini(const std::string& text) {
    IniData ini;
    std::istringstream in(text);
    std::string line, section;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError("line " + std::to_string(lineno), "unterminated section");
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno), "expected key = value");
        ini.sections[section][trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }
    return ini;
}

inline bool parse_bool(const std::string& v, const std::string& field) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(field, "expected a boolean, got '" + v + "'");
}

inline double parse_num(const std::string& v, const std::string& field) {
    try {
        size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError(field, "expected a number, got '" + v + "'");
    }
}

inline std::vector<int> parse_int_list(const std::string& v, const std::string& field) {
    std::vector<int> out;
    std::string cur;
    std::istringstream ss(v);
    while (std::getline(ss, cur, ',')) {
        cur = trim(cur);
        if (cur.empty()) continue;
        out.push_back(static_cast<int>(parse_num(cur, field)));
    }
    return out;
}

}  // namespace configdetail

inline PipelineConfig parse_pipeline_config(const std::string& text) {
    using namespace configdetail;
    const IniData ini = parse_ini(text);
    PipelineConfig cfg;

    auto lookup = [&](const std::string& section, const std::string& key) -> const std::string* {
        auto sit = ini.sections.find(section);
        if (sit == ini.sections.end()) return nullptr;
        auto kit = sit->second.find(key);
        return kit == sit->second.end() ? nullptr : &kit->second;
    };
    auto num = [&](const std::string& sec, const std::string& key, double& target) {
        if (const auto* v = lookup(sec, key)) target = parse_num(*v, sec + "." + key);
    };
    auto integer = [&](const std::string& sec, const std::string& key, int& target) {
        if (const auto* v = lookup(sec, key))
            target = static_cast<int>(parse_num(*v, sec + "." + key));
    };
    auto boolean = [&](const std::string& sec, const std::string& key, bool& target) {
        if (const auto* v = lookup(sec, key)) target = parse_bool(*v, sec + "." + key);
    };
    auto str = [&](const std::string& sec, const std::string& key, std::string& target) {
        if (const auto* v = lookup(sec, key)) target = *v;
    };

    if (const auto* v = lookup("", "seed"))
        cfg.seed = static_cast<std::uint64_t>(parse_num(*v, "seed"));

    str("paths", "footprints", cfg.footprints_path);
    str("paths", "metadata", cfg.metadata_path);
    str("paths", "crops", cfg.crops_path);
    str("paths", "summaries", cfg.summaries_path);

    num("filter", "min_quality", cfg.filter.min_quality);
    integer("filter", "night_start_hour", cfg.filter.night_start_hour);
    integer("filter", "night_end_hour", cfg.filter.night_end_hour);
    integer("filter", "utc_offset_minutes", cfg.filter.utc_offset_minutes);
    boolean("filter", "exclude_panoramas", cfg.filter.exclude_panoramas);
    if (const auto* v = lookup("filter", "bbox")) {
        std::vector<double> nums;
        std::istringstream ss(*v);
        std::string item;
        while (std::getline(ss, item, ','))
            nums.push_back(parse_num(trim(item), "filter.bbox"));
        if (nums.size() != 4)
            throw ConfigError("filter.bbox", "expected lon_min,lat_min,lon_max,lat_max");
        cfg.filter.bounding_box = {nums[0], nums[1], nums[2], nums[3]};
        if (!cfg.filter.bounding_box.well_ordered())
            throw ConfigError("filter.bbox", "min must be < max on both axes");
    }

    num("matcher", "hfov_deg", cfg.matcher.hfov_deg);
    num("matcher", "buffer_radius_m", cfg.matcher.buffer_radius_m);
    num("matcher", "max_range_m", cfg.matcher.max_range_m);
    num("matcher", "eps_deg", cfg.matcher.eps_deg);
    num("matcher", "cell_size_deg", cfg.matcher.cell_size_deg);
    if (cfg.matcher.hfov_deg <= 0.0 || cfg.matcher.hfov_deg >= 180.0)
        throw ConfigError("matcher.hfov_deg", "must be in (0, 180)");
    if (cfg.matcher.buffer_radius_m <= 0.0)
        throw ConfigError("matcher.buffer_radius_m", "must be > 0");
    if (cfg.matcher.max_range_m <= 0.0)
        throw ConfigError("matcher.max_range_m", "must be > 0");
    if (cfg.matcher.eps_deg <= 0.0) throw ConfigError("matcher.eps_deg", "must be > 0");
    if (cfg.matcher.cell_size_deg <= 0.0)
        throw ConfigError("matcher.cell_size_deg", "must be > 0");

    num("quality", "min_building", cfg.quality.min_building);
    num("quality", "max_vegetation", cfg.quality.max_vegetation);
    num("quality", "top_building", cfg.quality.top_building);
    num("quality", "top_vegetation", cfg.quality.top_vegetation);
    boolean("quality", "require_windows", cfg.quality.require_windows);

    if (const auto* v = lookup("train", "variant"))
        cfg.train.variant = variant_from_string(*v);
    if (const auto* v = lookup("train", "cuts"))
        cfg.train.cuts = parse_int_list(*v, "train.cuts");
    boolean("train", "mtl_roof", cfg.train.mtl_roof);
    integer("train", "feature_dim", cfg.train.feature_dim);
    if (const auto* v = lookup("train", "hidden"))
        cfg.train.hidden = parse_int_list(*v, "train.hidden");
    num("train", "learning_rate", cfg.train.learning_rate);
    integer("train", "epochs", cfg.train.epochs);
    integer("train", "batch_size", cfg.train.batch_size);
    if (cfg.train.epochs <= 0) throw ConfigError("train.epochs", "must be > 0");
    if (cfg.train.batch_size <= 0) throw ConfigError("train.batch_size", "must be > 0");
    if (cfg.train.learning_rate <= 0.0)
        throw ConfigError("train.learning_rate", "must be > 0");

    cfg.train.seed = cfg.seed;
    return cfg;
}

}  // namespace floorcast
