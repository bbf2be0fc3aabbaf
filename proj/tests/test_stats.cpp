#include <catch2/catch.hpp>

#include <random>

#include "floorcast/fsio.hpp"
#include "floorcast/stats.hpp"
#include "support.hpp"

using namespace floorcast;

TEST_CASE("the Munich records fixture has the expected per-floor counts") {
    const auto records = parse_records_csv(
        read_text_file(testsupport::fixture_path("munich_floor_records.csv")));
    REQUIRE(records.size() == 6827);
    const auto h = floor_histogram(records);

    CHECK(h.totals.total == 6827);
    CHECK(h.totals.mapillary == 6473);
    CHECK(h.totals.self_captured == 354);

    CHECK(h.rows.at(1).total == 835);
    CHECK(h.rows.at(2).total == 1535);
    CHECK(h.rows.at(3).total == 1126);
    CHECK(h.rows.at(4).total == 1594);
    CHECK(h.rows.at(5).total == 784);
    CHECK(h.rows.at(6).total == 441);
    CHECK(h.rows.at(7).total == 103);
    CHECK(h.rows.at(8).total == 70);
    CHECK(h.rows.at(8).mapillary == 37);
    CHECK(h.rows.at(8).self_captured == 33);
    CHECK(h.rows.at(9).mapillary == 18);
    CHECK(h.rows.at(9).self_captured == 48);
    CHECK(h.rows.at(10).total == 48);
    CHECK(h.rows.at(10).self_captured == 48);
    CHECK(h.rows.at(17).total == 12);
    CHECK(h.rows.at(18).total == 27);
}

TEST_CASE("a single record yields one row of count 1") {
    const auto h = floor_histogram({{"img", "fp", 6, ImageSource::mapillary, std::nullopt}});
    CHECK(h.rows.size() == 1);
    CHECK(h.rows.at(6).total == 1);
    CHECK(h.totals.total == 1);
}

TEST_CASE("per-source columns always sum to the total column") {
    std::mt19937_64 rng(43);
    std::vector<DatasetRecord> records;
    for (int i = 0; i < 500; ++i) {
        DatasetRecord r;
        r.image_id = "i" + std::to_string(i);
        r.footprint_id = "f" + std::to_string(i % 40);
        r.floor_count = 1 + static_cast<int>(rng() % 22);  // even beyond 18
        r.source = rng() % 3 ? ImageSource::mapillary : ImageSource::self_captured;
        records.push_back(std::move(r));
    }
    const auto h = floor_histogram(records);
    int sum = 0;
    for (const auto& [floor, row] : h.rows) {
        CHECK(row.total == row.mapillary + row.self_captured);
        sum += row.total;
    }
    CHECK(sum == 500);
    CHECK(h.totals.total == 500);
}

TEST_CASE("histogram totals are invariant under record reordering") {
    std::vector<DatasetRecord> records;
    for (int i = 0; i < 60; ++i)
        records.push_back({"i" + std::to_string(i), "f", 1 + i % 5,
                           i % 2 ? ImageSource::mapillary : ImageSource::self_captured,
                           std::nullopt});
    const auto a = histogram_to_csv(floor_histogram(records));
    std::reverse(records.begin(), records.end());
    const auto b = histogram_to_csv(floor_histogram(records));
    CHECK(a == b);
}

TEST_CASE("floors above 18 land in the 19+ bucket") {
    const auto h = floor_histogram({{"a", "f", 19, ImageSource::mapillary, std::nullopt},
                                    {"b", "f", 30, ImageSource::self_captured, std::nullopt},
                                    {"c", "f", 18, ImageSource::mapillary, std::nullopt}});
    CHECK(h.rows.at(FloorHistogram::kOverflowKey).total == 2);
    CHECK(h.rows.at(18).total == 1);
    CHECK(histogram_to_csv(h).find("19+") != std::string::npos);
}

TEST_CASE("empty record lists are rejected") {
    CHECK_THROWS_AS(floor_histogram({}), DataError);
}

TEST_CASE("height export keeps complete footprints and counts skips") {
    std::vector<Footprint> fps;
    auto mk = [&](std::string id, std::optional<int> floors, std::optional<double> h) {
        Footprint fp = testsupport::square_at(testsupport::anchor(), 0, 0, 5, std::move(id));
        fp.floor_count = floors;
        fp.height_m = h;
        fp.roof_type = RoofType::flat;
        fp.function = BuildingFunction::residential;
        return fp;
    };
    fps.push_back(mk("a", 4, 12.5));
    fps.push_back(mk("b", std::nullopt, 9.0));
    fps.push_back(mk("c", 6, std::nullopt));
    fps.push_back(mk("d", 2, 6.25));
    fps.push_back(mk("e", 7, 21.0));

    const auto out = height_floor_export(fps);
    CHECK(out.skipped == 2);
    const auto table = parse_csv(out.csv);
    REQUIRE(table.rows.size() == 3);

    SECTION("export re-imports to identical tuples") {
        const int fc = table.require_column("floor_count");
        const int hm = table.require_column("height_m");
        CHECK(parse_int(table.rows[0][fc], "floor_count") == 4);
        CHECK(parse_double(table.rows[0][hm], "height_m") == Approx(12.5));
        CHECK(parse_int(table.rows[2][fc], "floor_count") == 7);
        CHECK(parse_double(table.rows[2][hm], "height_m") == Approx(21.0));
        CHECK(table.rows[1][table.require_column("roof_type")] == "flat");
        CHECK(table.rows[1][table.require_column("function")] == "residential");
    }
}

TEST_CASE("records CSV parsing validates values") {
    CHECK_THROWS_AS(parse_records_csv("image_id,footprint_id,floor_count,source\n"
                                      "a,f,0,mapillary\n"),
                    DataError);
    CHECK_THROWS_AS(parse_records_csv("image_id,footprint_id,floor_count,source\n"
                                      "a,f,3,flickr\n"),
                    DataError);
    const auto ok = parse_records_csv(
        "image_id,footprint_id,floor_count,source,height_m\na,f,3,mapillary,12.5\n");
    REQUIRE(ok.size() == 1);
    CHECK(ok[0].height_m == Approx(12.5));
}
