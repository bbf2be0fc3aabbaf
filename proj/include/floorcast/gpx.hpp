#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "floorcast/csv.hpp"
#include "floorcast/datetime.hpp"
#include "floorcast/errors.hpp"
#include "floorcast/geo.hpp"

namespace floorcast {

struct GpxPoint {
    LonLat pos;
    std::optional<std::int64_t> time_s;
    std::string name;
};

namespace gpxdetail {

inline std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

inline std::string xml_unescape(const std::string& s) {
    std::string out;
    for (size_t i = 0; i < s.size();) {
        if (s[i] == '&') {
            if (s.compare(i, 5, "&amp;") == 0) { out += '&'; i += 5; continue; }
            if (s.compare(i, 4, "&lt;") == 0) { out += '<'; i += 4; continue; }
            if (s.compare(i, 4, "&gt;") == 0) { out += '>'; i += 4; continue; }
            if (s.compare(i, 6, "&quot;") == 0) { out += '"'; i += 6; continue; }
        }
        out += s[i++];
    }
    return out;
}

inline std::string point_xml(const char* tag, const GpxPoint& p, const char* indent) {
    std::string out = indent;
    out += "<";
    out += tag;
    out += " lat=\"" + fmt_double(p.pos.lat, 7) + "\" lon=\"" + fmt_double(p.pos.lon, 7) + "\">\n";
    if (p.time_s) out += std::string(indent) + "  <time>" + format_iso8601(*p.time_s) + "</time>\n";
    if (!p.name.empty())
        out += std::string(indent) + "  <name>" + xml_escape(p.name) + "</name>\n";
    out += indent;
    out += "</";
    out += tag;
    out += ">\n";
    return out;
}

inline std::optional<std::string> attr_value(const std::string& tag_text, const std::string& attr) {
    size_t p = tag_text.find(attr + "=\"");
    if (p == std::string::npos) return std::nullopt;
    p += attr.size() + 2;
    size_t q = tag_text.find('"', p);
    if (q == std::string::npos) return std::nullopt;
    return tag_text.substr(p, q - p);
}

inline std::optional<std::string> child_text(const std::string& body, const std::string& tag) {
    const std::string open = "<" + tag + ">";
    const std::string close = "</" + tag + ">";
    size_t p = body.find(open);
    if (p == std::string::npos) return std::nullopt;
    p += open.size();
    size_t q = body.find(close, p);
    if (q == std::string::npos) return std::nullopt;
    return body.substr(p, q - p);
}

// Extracts <tag ...>...</tag> elements in document order.
inline std::vector<GpxPoint> parse_points(const std::string& text, const std::string& tag) {
    std::vector<GpxPoint> pts;
    size_t pos = 0;
    const std::string open = "<" + tag;
    while (true) {
        size_t p = text.find(open, pos);
        if (p == std::string::npos) break;
        size_t tag_end = text.find('>', p);
        if (tag_end == std::string::npos) throw MalformedDocument("unterminated GPX tag");
        const std::string head = text.substr(p, tag_end - p);
        size_t close = text.find("</" + tag + ">", tag_end);
        if (close == std::string::npos) throw MalformedDocument("missing </" + tag + ">");
        const std::string body = text.substr(tag_end + 1, close - tag_end - 1);
        pos = close + tag.size() + 3;

        GpxPoint pt;
        auto lat = attr_value(head, "lat");
        auto lon = attr_value(head, "lon");
        if (!lat || !lon) throw MalformedDocument("GPX " + tag + " without lat/lon");
        pt.pos.lat = parse_double(*lat, "lat");
        pt.pos.lon = parse_double(*lon, "lon");
        if (auto t = child_text(body, "time")) pt.time_s = parse_iso8601(*t);
        if (auto n = child_text(body, "name")) pt.name = xml_unescape(*n);
        pts.push_back(std::move(pt));
    }
    return pts;
}

}  // namespace gpxdetail

inline std::string write_gpx_waypoints(const std::vector<GpxPoint>& points) {
    std::string out =
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<gpx version=\"1.1\" creator=\"floorcast\" "
        "xmlns=\"http://www.topografix.com/GPX/1/1\">\n";
    for (const auto& p : points) out += gpxdetail::point_xml("wpt", p, "  ");
    out += "</gpx>\n";
    return out;
}

inline std::string write_gpx_route(const std::string& route_name,
                                   const std::vector<GpxPoint>& points) {
    std::string out =
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<gpx version=\"1.1\" creator=\"floorcast\" "
        "xmlns=\"http://www.topografix.com/GPX/1/1\">\n"
        "  <rte>\n"
        "    <name>" + gpxdetail::xml_escape(route_name) + "</name>\n";
    for (const auto& p : points) out += gpxdetail::point_xml("rtept", p, "    ");
    out += "  </rte>\n</gpx>\n";
    return out;
}

inline std::vector<GpxPoint> parse_gpx_waypoints(const std::string& text) {
    return gpxdetail::parse_points(text, "wpt");
}

inline std::vector<GpxPoint> parse_gpx_route(const std::string& text) {
    return gpxdetail::parse_points(text, "rtept");
}

}  // namespace floorcast
