#include <catch2/catch.hpp>

#include <random>

#include "floorcast/footprint_store.hpp"
#include "support.hpp"

using namespace floorcast;
using testsupport::anchor;
using testsupport::pointers;
using testsupport::square_at;

namespace {

std::string feature(const std::string& id, const std::vector<std::vector<double>>& ring,
                    const std::string& props = "{}") {
    std::string coords = "[";
    for (size_t i = 0; i < ring.size(); ++i) {
        if (i) coords += ",";
        coords += "[" + std::to_string(ring[i][0]) + "," + std::to_string(ring[i][1]) + "]";
    }
    coords += "]";
    return R"({"type": "Feature", "id": ")" + id + R"(", "properties": )" + props +
           R"(, "geometry": {"type": "Polygon", "coordinates": [)" + coords + "]}}";
}

std::string collection(const std::vector<std::string>& features) {
    std::string out = R"({"type": "FeatureCollection", "features": [)";
    for (size_t i = 0; i < features.size(); ++i) {
        if (i) out += ",";
        out += features[i];
    }
    return out + "]}";
}

// Independent oracle: fan-triangulate from vertex 0 and area-weight the
// triangle centroids.
XY fan_centroid(const std::vector<XY>& ring) {
    double total_area = 0.0, cx = 0.0, cy = 0.0;
    for (size_t i = 1; i + 1 < ring.size(); ++i) {
        const XY& a = ring[0];
        const XY& b = ring[i];
        const XY& c = ring[i + 1];
        const double area = 0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x));
        total_area += area;
        cx += area * (a.x + b.x + c.x) / 3.0;
        cy += area * (a.y + b.y + c.y) / 3.0;
    }
    return {cx / total_area, cy / total_area};
}

}  // namespace

TEST_CASE("load_footprints accepts a single valid square") {
    const auto r = load_footprints(collection({feature(
        "sq", {{11.57, 48.14}, {11.571, 48.14}, {11.571, 48.141}, {11.57, 48.141}, {11.57, 48.14}},
        R"({"floors": 4, "height_m": 12.5, "roof_type": "flat", "function": "residential"})")}));
    CHECK(r.store.size() == 1);
    CHECK(r.issues.empty());
    const Footprint* fp = r.store.find("sq");
    REQUIRE(fp != nullptr);
    CHECK(fp->floor_count == 4);
    CHECK(fp->height_m == Approx(12.5));
    CHECK(fp->roof_type == RoofType::flat);
    CHECK(fp->function == BuildingFunction::residential);
    CHECK(fp->exterior.size() == 4);  // closing vertex dropped
}

TEST_CASE("clockwise rings are stored counter-clockwise") {
    const auto r = load_footprints(collection({feature(
        "cw", {{11.57, 48.14}, {11.57, 48.141}, {11.571, 48.141}, {11.571, 48.14}, {11.57, 48.14}})}));
    const Footprint* fp = r.store.find("cw");
    REQUIRE(fp != nullptr);
    CHECK(ring_signed_area_deg(fp->exterior) > 0.0);
}

TEST_CASE("self-intersecting bowtie is rejected with a log entry") {
    std::vector<std::string> feats;
    for (int i = 0; i < 5; ++i) {
        const double lon = 11.57 + 0.002 * i;
        feats.push_back(feature("ok" + std::to_string(i),
                                {{lon, 48.14}, {lon + 0.001, 48.14}, {lon + 0.001, 48.141},
                                 {lon, 48.141}, {lon, 48.14}}));
    }
    // asymmetric bowtie: edge 0-1 crosses edge 2-3, nonzero signed area
    feats.push_back(feature("bowtie", {{11.6, 48.14}, {11.603, 48.143}, {11.603, 48.14},
                                       {11.6, 48.141}, {11.6, 48.14}}));
    const auto r = load_footprints(collection(feats));
    CHECK(r.store.size() == 5);
    REQUIRE(r.issues.size() == 1);
    CHECK(r.issues[0].message.find("self-intersect") != std::string::npos);
}

TEST_CASE("degenerate rings are rejected") {
    CHECK_THROWS_AS(
        load_footprints(collection({feature("line", {{11.57, 48.14}, {11.58, 48.14}})})),
        DataError);  // the only feature fails -> empty store
    const auto r = load_footprints(collection(
        {feature("zero", {{11.57, 48.14}, {11.58, 48.14}, {11.59, 48.14}, {11.57, 48.14}}),
         feature("ok", {{11.57, 48.14}, {11.571, 48.14}, {11.571, 48.141}, {11.57, 48.14}})}));
    CHECK(r.store.size() == 1);
    CHECK(r.issues.size() == 1);
}

TEST_CASE("malformed and empty documents raise") {
    CHECK_THROWS_AS(load_footprints("nope"), MalformedDocument);
    CHECK_THROWS_AS(load_footprints(R"({"type": "Feature"})"), MalformedDocument);
    CHECK_THROWS_AS(load_footprints(R"({"type": "FeatureCollection", "features": []})"),
                    DataError);
}

TEST_CASE("interior rings are ignored with a count") {
    const std::string f =
        R"({"type": "Feature", "id": "holed", "properties": {},
            "geometry": {"type": "Polygon", "coordinates": [
              [[11.57,48.14],[11.575,48.14],[11.575,48.145],[11.57,48.145],[11.57,48.14]],
              [[11.571,48.141],[11.572,48.141],[11.572,48.142],[11.571,48.142],[11.571,48.141]]
            ]}})";
    const auto r = load_footprints(collection({f}));
    CHECK(r.store.size() == 1);
    CHECK(r.holes_ignored == 1);
}

TEST_CASE("query_buffer includes the footprint containing the center") {
    std::vector<Footprint> fps{square_at(anchor(), 0.0, 0.0, 20.0, "home")};
    FootprintStore store;
    for (auto& f : fps) store.insert(f);
    const auto hits = store.query_buffer(anchor(), 1.0);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0]->id == "home");
}

TEST_CASE("query_buffer excludes footprints beyond the radius") {
    FootprintStore store;
    store.insert(square_at(anchor(), 0.0, 510.0, 10.0, "far"));  // nearest vertex 500 m
    CHECK(store.query_buffer(anchor(), 100.0).empty());
    CHECK(store.query_buffer(anchor(), 501.0).size() == 1);
}

TEST_CASE("query_buffer equals a brute-force scan on random scenes") {
    std::mt19937_64 rng(23);
    auto u = [&](double lo, double hi) {
        return lo + (static_cast<double>(rng() >> 11) * 0x1.0p-53) * (hi - lo);
    };
    for (int scene = 0; scene < 20; ++scene) {
        FootprintStore store(0.002);
        std::vector<Footprint> fps;
        for (int i = 0; i < 50; ++i)
            fps.push_back(square_at(anchor(), u(-800, 800), u(-800, 800), u(3, 25),
                                    "fp" + std::to_string(i)));
        for (const auto& f : fps) store.insert(f);

        for (int q = 0; q < 10; ++q) {
            const LonLat center = unproject_local(anchor(), {u(-800, 800), u(-800, 800)});
            const double radius = u(10, 400);
            const auto got = store.query_buffer(center, radius);

            std::vector<std::string> expect;
            for (const auto& f : fps)
                if (footprint_within(f, center, radius)) expect.push_back(f.id);
            REQUIRE(got.size() == expect.size());
            for (size_t i = 0; i < got.size(); ++i) CHECK(got[i]->id == expect[i]);
        }
    }
}

TEST_CASE("query_buffer is monotone in the radius") {
    std::mt19937_64 rng(29);
    auto u = [&](double lo, double hi) {
        return lo + (static_cast<double>(rng() >> 11) * 0x1.0p-53) * (hi - lo);
    };
    FootprintStore store;
    for (int i = 0; i < 30; ++i)
        store.insert(square_at(anchor(), u(-500, 500), u(-500, 500), u(3, 20),
                               "fp" + std::to_string(i)));
    for (int q = 0; q < 20; ++q) {
        const LonLat center = unproject_local(anchor(), {u(-500, 500), u(-500, 500)});
        const double r1 = u(5, 200), r2 = r1 + u(0, 300);
        const auto small = store.query_buffer(center, r1);
        const auto big = store.query_buffer(center, r2);
        for (const auto* fp : small)
            CHECK(std::find(big.begin(), big.end(), fp) != big.end());
    }
}

TEST_CASE("centroid of a square is its center") {
    const auto fp = square_at(anchor(), 100.0, -50.0, 10.0, "sq");
    const LonLat c = centroid(fp);
    const XY local = project_local(anchor(), c);
    CHECK(local.x == Approx(100.0).margin(1e-6));
    CHECK(local.y == Approx(-50.0).margin(1e-6));
}

TEST_CASE("centroid is translation-equivariant") {
    const auto fp = square_at(anchor(), 0.0, 0.0, 12.0, "sq");
    const double dlon = 0.003, dlat = -0.002;
    Footprint moved = fp;
    for (auto& v : moved.exterior) {
        v.lon += dlon;
        v.lat += dlat;
    }
    const LonLat c0 = centroid(fp);
    const LonLat c1 = centroid(moved);
    CHECK(c1.lon - c0.lon == Approx(dlon).margin(1e-9));
    CHECK(c1.lat - c0.lat == Approx(dlat).margin(1e-9));
}

TEST_CASE("centroid rejects degenerate rings") {
    Footprint fp;
    fp.id = "line";
    fp.exterior = {{11.57, 48.14}, {11.58, 48.14}};
    CHECK_THROWS_AS(centroid(fp), DataError);
    fp.exterior = {{11.57, 48.14}, {11.58, 48.14}, {11.59, 48.14}};  // zero area
    CHECK_THROWS_AS(centroid(fp), DataError);
}

TEST_CASE("centroid of an L-shape matches the fan-triangulation oracle") {
    const std::vector<XY> ring_m{{0, 0}, {20, 0}, {20, 10}, {10, 10}, {10, 20}, {0, 20}};
    const auto fp = testsupport::footprint_from_meters(anchor(), ring_m, "L");
    const XY expect = fan_centroid(ring_m);
    const XY got = project_local(anchor(), centroid(fp));
    CHECK(got.x == Approx(expect.x).margin(1e-6));
    CHECK(got.y == Approx(expect.y).margin(1e-6));
    // frozen oracle value for the 20 m L: (25/3, 25/3)
    CHECK(expect.x == Approx(25.0 / 3.0).margin(1e-9));
}

TEST_CASE("store snapshot round-trips ids, rings and attributes") {
    std::vector<std::string> feats;
    feats.push_back(feature("a", {{11.57, 48.14}, {11.571, 48.14}, {11.571, 48.141}, {11.57, 48.141},
                                  {11.57, 48.14}},
                            R"({"floors": 3, "height_m": 9.0, "roof_type": "nonflat",
                                "function": "commercial"})"));
    feats.push_back(feature("b", {{11.58, 48.15}, {11.581, 48.15}, {11.581, 48.151},
                                  {11.58, 48.15}}));
    const auto loaded = load_footprints(collection(feats));
    const std::string snap1 = store_to_json(loaded.store);
    const FootprintStore again = store_from_json(snap1);
    const std::string snap2 = store_to_json(again);
    CHECK(snap1 == snap2);
    REQUIRE(again.size() == 2);
    CHECK(again.find("a")->floor_count == 3);
    CHECK(again.find("a")->roof_type == RoofType::nonflat);
    CHECK_FALSE(again.find("b")->floor_count.has_value());
}
