#include <catch2/catch.hpp>

#include <algorithm>
#include <random>

#include "floorcast/planner.hpp"
#include "support.hpp"

using namespace floorcast;
using testsupport::anchor;
using testsupport::square_at;

namespace {

FootprintStore store_with_floors(const std::vector<int>& floors) {
    FootprintStore store;
    for (size_t i = 0; i < floors.size(); ++i)
        store.insert(square_at(anchor(), 40.0 * static_cast<double>(i), 25.0 * ((i % 7) + 1),
                               8.0, "b" + std::to_string(i), floors[i]));
    return store;
}

// Exhaustive open-path optimum for small instances.
double brute_force_optimum(const std::vector<std::vector<double>>& m) {
    std::vector<int> perm(m.size());
    for (size_t i = 0; i < m.size(); ++i) perm[i] = static_cast<int>(i);
    double best = std::numeric_limits<double>::infinity();
    do {
        best = std::min(best, tour_length(m, perm));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

}  // namespace

TEST_CASE("select_targets draws the quota deterministically") {
    const auto store = store_with_floors({10, 10, 10, 10, 10});
    Quota quota;
    quota.per_floor[10] = 2;
    const auto a = select_targets(store, quota, 99);
    const auto b = select_targets(store, quota, 99);
    REQUIRE(a.targets.size() == 2);
    CHECK(a.targets[0]->id == b.targets[0]->id);
    CHECK(a.targets[1]->id == b.targets[1]->id);
    CHECK(a.shortfalls.size() == 1);
    CHECK(a.shortfalls[0].selected == 2);
}

TEST_CASE("select_targets caps at availability and reports the shortfall") {
    const auto store = store_with_floors({18, 18, 18, 18});
    Quota quota;
    quota.per_floor[18] = 5;
    const auto r = select_targets(store, quota, 1);
    CHECK(r.targets.size() == 4);
    REQUIRE(r.shortfalls.size() == 1);
    CHECK(r.shortfalls[0].requested == 5);
    CHECK(r.shortfalls[0].selected == 4);
}

TEST_CASE("different seeds usually select different subsets") {
    std::vector<int> floors(60, 5);
    const auto store = store_with_floors(floors);
    Quota quota;
    quota.per_floor[5] = 5;
    int distinct = 0;
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto a = select_targets(store, quota, s);
        const auto b = select_targets(store, quota, s + 1000);
        std::vector<std::string> ia, ib;
        for (const auto* f : a.targets) ia.push_back(f->id);
        for (const auto* f : b.targets) ib.push_back(f->id);
        if (ia != ib) ++distinct;
    }
    CHECK(distinct >= 8);
}

TEST_CASE("buildings above 18 floors are never selected") {
    const auto store = store_with_floors({19, 25, 18});
    Quota quota;
    quota.per_floor[19] = 2;
    quota.per_floor[25] = 1;
    quota.per_floor[18] = 1;
    const auto r = select_targets(store, quota, 4);
    REQUIRE(r.targets.size() == 1);
    CHECK(*r.targets[0]->floor_count == 18);
}

TEST_CASE("solve_tsp on two points") {
    const std::vector<std::vector<double>> m{{0, 5}, {5, 0}};
    CHECK(solve_tsp(m) == std::vector<int>{0, 1});
}

TEST_CASE("solve_tsp on collinear points keeps the natural order") {
    // A at 0, B at 1, C at 3 on a line
    const std::vector<std::vector<double>> m{{0, 1, 3}, {1, 0, 2}, {3, 2, 0}};
    const auto tour = solve_tsp(m);
    CHECK(tour == std::vector<int>{0, 1, 2});
    CHECK(tour_length(m, tour) == Approx(3.0));
}

TEST_CASE("solve_tsp validates the matrix") {
    CHECK_THROWS_AS(solve_tsp({{0}}), DataError);
    CHECK_THROWS_AS(solve_tsp({{0, 1}, {2, 0}}), DataError);          // asymmetric
    CHECK_THROWS_AS(solve_tsp({{0, -1}, {-1, 0}}), DataError);        // negative
    CHECK_THROWS_AS(solve_tsp({{1, 2}, {2, 0}}), DataError);          // nonzero diagonal
    CHECK_THROWS_AS(solve_tsp({{0, 1, 2}, {1, 0, 3}}), DataError);    // not square
}

TEST_CASE("solve_tsp output is a permutation and 2-opt never loses to NN") {
    std::mt19937_64 rng(61);
    auto u = [&]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    for (int inst = 0; inst < 30; ++inst) {
        const int n = 4 + static_cast<int>(rng() % 9);
        std::vector<XY> pts;
        for (int i = 0; i < n; ++i) pts.push_back({u() * 1000, u() * 1000});
        std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                m[i][j] = std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y);

        const auto tour = solve_tsp(m);
        std::vector<int> sorted = tour;
        std::sort(sorted.begin(), sorted.end());
        for (int i = 0; i < n; ++i) CHECK(sorted[i] == i);

        CHECK(tour_length(m, tour) <= tour_length(m, nearest_neighbor_tour(m)) + 1e-9);
    }
}

TEST_CASE("2-opt lands close to the brute-force optimum on 8 points") {
    std::mt19937_64 rng(67);
    auto u = [&]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    int good = 0;
    const int instances = 40;
    for (int inst = 0; inst < instances; ++inst) {
        const int n = 8;
        std::vector<XY> pts;
        for (int i = 0; i < n; ++i) pts.push_back({u() * 1000, u() * 1000});
        std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                m[i][j] = std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y);
        const double ours = tour_length(m, solve_tsp(m));
        const double best = brute_force_optimum(m);
        CHECK(ours >= best - 1e-9);
        if (ours <= 1.05 * best) ++good;
    }
    CHECK(good >= instances * 9 / 10);
}

TEST_CASE("haversine quota plan exports consistent GPX and CSV") {
    const auto store = store_with_floors({12, 12, 12, 14, 14});
    Quota quota;
    quota.per_floor[12] = 3;
    quota.per_floor[14] = 2;
    const auto selection = select_targets(store, quota, 7);
    const auto plan = make_plan(selection.targets, 3);
    REQUIRE(plan.stops.size() == 5);

    SECTION("no duplicate stops, total equals the leg sum") {
        double legs = 0.0;
        for (size_t i = 1; i < plan.stops.size(); ++i)
            legs += haversine_m(plan.stops[i - 1].point, plan.stops[i].point);
        CHECK(plan.total_distance_m == Approx(legs));
        std::vector<std::string> ids;
        for (const auto& s : plan.stops) ids.push_back(s.footprint_id);
        std::sort(ids.begin(), ids.end());
        CHECK(std::adjacent_find(ids.begin(), ids.end()) == ids.end());
    }

    SECTION("CSV cumulative column ends at the total") {
        const std::string csv = route_to_csv(plan);
        const auto table = parse_csv(csv);
        const auto& last = table.rows.back();
        CHECK(parse_double(last[5], "cumulative_m") ==
              Approx(plan.total_distance_m).margin(0.01));
    }

    SECTION("GPX re-import preserves the visit order") {
        const auto pts = parse_gpx_route(route_to_gpx(plan));
        REQUIRE(pts.size() == plan.stops.size());
        for (size_t i = 0; i < pts.size(); ++i)
            CHECK(pts[i].name == plan.stops[i].footprint_id);
    }
}

TEST_CASE("single-building plan has zero distance") {
    const auto store = store_with_floors({9});
    Quota quota;
    quota.per_floor[9] = 1;
    const auto plan = make_plan(select_targets(store, quota, 1).targets);
    CHECK(plan.total_distance_m == 0.0);
    const std::string gpx = route_to_gpx(plan);
    CHECK(gpx.find("<rtept") != std::string::npos);
    CHECK(gpx.find("<rtept", gpx.find("<rtept") + 1) == std::string::npos);
}

TEST_CASE("empty plans are rejected") {
    CHECK_THROWS_AS(make_plan({}), DataError);
}

TEST_CASE("closed tours add the return leg") {
    const auto store = store_with_floors({7, 7, 7});
    Quota quota;
    quota.per_floor[7] = 3;
    const auto targets = select_targets(store, quota, 3).targets;
    const auto open = make_plan(targets, 3, false);
    const auto closed = make_plan(targets, 3, true);
    CHECK(closed.total_distance_m >
          open.total_distance_m - 1e-9);  // return leg can only add distance
    const auto csv = parse_csv(route_to_csv(closed));
    CHECK(csv.rows.size() == 4);  // 3 stops + return row
}
