#include <catch2/catch.hpp>

#include <random>

#include "floorcast/head.hpp"

using namespace floorcast;

namespace {

std::vector<double> random_scores(std::mt19937_64& rng, int n, double lo = -1.5,
                                  double hi = 1.5) {
    std::vector<double> s(n);
    for (double& v : s)
        v = lo + (static_cast<double>(rng() >> 11) * 0x1.0p-53) * (hi - lo);
    return s;
}

HeadOutputs random_outputs(std::mt19937_64& rng, const SubsetPartition& part) {
    HeadOutputs o;
    o.gate = part.gated() ? softmax(random_scores(rng, part.subset_count(), -3.0, 3.0))
                          : std::vector<double>{1.0};
    for (int s = 0; s < part.subset_count(); ++s)
        o.within.push_back(softmax(random_scores(rng, part.subset_size(s), -3.0, 3.0)));
    return o;
}

}  // namespace

TEST_CASE("the default partition places classes per the cut points 5 and 11") {
    const auto part = SubsetPartition::head_tail_tail(5, 11);
    CHECK(part.subset_of(0) == 0);
    CHECK(part.subset_of(4) == 0);
    CHECK(part.subset_of(5) == 1);
    CHECK(part.subset_of(10) == 1);
    CHECK(part.subset_of(11) == 2);
    CHECK(part.subset_of(17) == 2);
    CHECK(part.subset_size(0) == 5);
    CHECK(part.subset_size(1) == 6);
    CHECK(part.subset_size(2) == 7);
}

TEST_CASE("partitions validate their cut points") {
    CHECK_THROWS_AS(SubsetPartition::head_tail_tail(11, 5), ConfigError);
    CHECK_THROWS_AS(SubsetPartition::head_tail(0), ConfigError);
    CHECK_THROWS_AS(SubsetPartition::head_tail(18), ConfigError);
    CHECK_NOTHROW(SubsetPartition::head_tail(6));
}

TEST_CASE("httc_loss is the negative log gate probability of the true subset") {
    const auto part = SubsetPartition::head_tail_tail(5, 11);
    CHECK(httc_loss({1.0, 0.0, 0.0}, 2, part) == Approx(0.0).margin(1e-12));
    CHECK(httc_loss({0.25, 0.5, 0.25}, 7, part) == Approx(0.6931471805599453));
    CHECK(httc_loss({0.1, 0.1, 0.8}, 12, part) == Approx(0.2231435513142097));
}

TEST_CASE("combine concatenates gate-weighted subset probabilities") {
    const auto part = SubsetPartition::head_tail_tail(5, 11);

    SECTION("uniform head with a pure head gate") {
        HeadOutputs o;
        o.gate = {1.0, 0.0, 0.0};
        o.within = {{0.2, 0.2, 0.2, 0.2, 0.2},
                    std::vector<double>(6, 1.0 / 6),
                    std::vector<double>(7, 1.0 / 7)};
        const auto pmf = combine(o, part);
        for (int c = 0; c < 5; ++c) CHECK(pmf[c] == Approx(0.2));
        for (int c = 5; c < 18; ++c) CHECK(pmf[c] == 0.0);
    }

    SECTION("split gate with concentrated subsets") {
        HeadOutputs o;
        o.gate = {0.5, 0.5, 0.0};
        o.within = {{1, 0, 0, 0, 0}, {1, 0, 0, 0, 0, 0}, std::vector<double>(7, 1.0 / 7)};
        const auto pmf = combine(o, part);
        CHECK(pmf[0] == Approx(0.5));
        CHECK(pmf[5] == Approx(0.5));
    }

    SECTION("output is always a PMF") {
        std::mt19937_64 rng(71);
        for (int i = 0; i < 500; ++i) {
            const auto pmf = combine(random_outputs(rng, part), part);
            double sum = 0.0;
            for (double p : pmf) {
                CHECK(p >= 0.0);
                sum += p;
            }
            CHECK(sum == Approx(1.0).margin(1e-9));
        }
    }
}

TEST_CASE("ce_loss over the combined PMF") {
    const auto part = SubsetPartition::head_tail_tail(5, 11);
    HeadOutputs o;
    o.gate = {1.0, 0.0, 0.0};
    o.within = {{1, 0, 0, 0, 0}, std::vector<double>(6, 1.0 / 6),
                std::vector<double>(7, 1.0 / 7)};
    CHECK(ce_loss(combine(o, part), 0) == Approx(0.0).margin(1e-12));

    ClassPMF quarter(kNumClasses, 0.75 / 17);
    quarter[9] = 0.25;
    CHECK(ce_loss(quarter, 9) == Approx(1.3862943611198906));
}

TEST_CASE("ce_loss dominates httc_loss (chain rule)") {
    const auto part = SubsetPartition::head_tail_tail(5, 11);
    std::mt19937_64 rng(73);
    for (int i = 0; i < 300; ++i) {
        const auto o = random_outputs(rng, part);
        const int c = static_cast<int>(rng() % kNumClasses);
        CHECK(ce_loss(combine(o, part), c) >= httc_loss(o.gate, c, part) - 1e-12);
    }
}

TEST_CASE("the CE decomposition holds exactly") {
    const auto part = SubsetPartition::head_tail_tail(5, 11);
    std::mt19937_64 rng(79);
    for (int i = 0; i < 300; ++i) {
        const auto o = random_outputs(rng, part);
        const int c = static_cast<int>(rng() % kNumClasses);
        const int s = part.subset_of(c);
        const double lhs = ce_loss(combine(o, part), c);
        const double rhs =
            httc_loss(o.gate, c, part) - clamped_log(o.within[s][c - part.range(s).first]);
        CHECK(lhs == Approx(rhs).margin(1e-9));
    }
}

TEST_CASE("expectation of the PMF") {
    ClassPMF delta(kNumClasses, 0.0);
    delta[4] = 1.0;
    CHECK(expectation(delta) == Approx(4.0));

    ClassPMF uniform(kNumClasses, 1.0 / kNumClasses);
    CHECK(expectation(uniform) == Approx(8.5));

    ClassPMF two(kNumClasses, 0.0);
    two[3] = 0.5;
    two[5] = 0.5;
    CHECK(expectation(two) == Approx(4.0));
}

TEST_CASE("reg_loss is the L1 distance") {
    CHECK(reg_loss(4.0, 4) == 0.0);
    CHECK(reg_loss(3.2, 4) == Approx(0.8));
    CHECK(reg_loss(8.5, 0) == Approx(8.5));
}

TEST_CASE("predict floors and clamps the raw output") {
    CHECK(predict(4.0) == 4);
    CHECK(predict(4.99) == 4);
    CHECK(predict(17.6) == 17);
    CHECK(predict(-0.4) == 0);

    double prev = -1.0;
    for (double f = -1.0; f <= 19.0; f += 0.1) {
        const int p = predict(f);
        CHECK(p >= static_cast<int>(prev));
        prev = p;
    }
}

TEST_CASE("roof auxiliary loss is a binary cross entropy") {
    CHECK(roof_aux_loss(1.0, true) == Approx(0.0).margin(1e-9));
    CHECK(roof_aux_loss(0.5, true) == Approx(0.6931471805599453));
    CHECK(roof_aux_loss(0.5, false) == Approx(0.6931471805599453));
    // increasing the probability lowers the loss for the positive label
    CHECK(roof_aux_loss(0.8, true) < roof_aux_loss(0.6, true));
    CHECK(roof_aux_loss(0.8, false) > roof_aux_loss(0.6, false));
}

TEST_CASE("per-head shift invariance of the normalizer") {
    const auto spec = VariantSpec::make(Variant::hyb_httc, {5, 11}, false);
    std::mt19937_64 rng(83);
    const auto base = random_scores(rng, spec.score_dim());
    const auto ev0 = head_eval(HeadScores{base}, spec, 7);

    // shift the gate block
    auto shifted = base;
    for (int j = 0; j < 3; ++j) shifted[j] += 2.5;
    const auto ev1 = head_eval(HeadScores{shifted}, spec, 7);
    CHECK(ev1.loss.total == Approx(ev0.loss.total).margin(1e-9));

    // shift one within block
    shifted = base;
    for (int j = 3 + 5; j < 3 + 5 + 6; ++j) shifted[j] -= 1.25;
    const auto ev2 = head_eval(HeadScores{shifted}, spec, 7);
    CHECK(ev2.loss.total == Approx(ev0.loss.total).margin(1e-9));
}

TEST_CASE("total loss composes additively and vanishes at a perfect prediction") {
    const auto spec = VariantSpec::make(Variant::hyb_httc, {5, 11}, false);
    // near-delta scores at class 7: big margins drive every term toward 0
    std::vector<double> scores(spec.score_dim(), -30.0);
    scores[1] = 30.0;                 // gate -> T1
    scores[3 + 5 + (7 - 5)] = 30.0;   // within T1 -> class 7
    const auto ev = head_eval(HeadScores{scores}, spec, 7);
    CHECK(ev.loss.total == Approx(0.0).margin(1e-9));
    CHECK(ev.prediction == 7);

    std::mt19937_64 rng(89);
    const auto s = random_scores(rng, spec.score_dim());
    const auto full = head_eval(HeadScores{s}, spec, 9);
    CHECK(full.loss.total ==
          Approx(full.loss.htt + full.loss.ce + full.loss.reg).margin(1e-12));
}

TEST_CASE("analytic gradients match central finite differences for all variants") {
    std::mt19937_64 rng(97);
    const double h = 1e-5;
    const std::vector<VariantSpec> specs = {
        VariantSpec::make(Variant::plain, {}, false),
        VariantSpec::make(Variant::htc, {6}, false),
        VariantSpec::make(Variant::httc, {5, 11}, false),
        VariantSpec::make(Variant::hyb, {}, false),
        VariantSpec::make(Variant::hyb_httc, {5, 11}, false),
        VariantSpec::make(Variant::plain, {}, true),
        VariantSpec::make(Variant::hyb_httc, {5, 11}, true),
    };
    for (const auto& spec : specs) {
        for (int rep = 0; rep < 8; ++rep) {
            const auto scores = random_scores(rng, spec.score_dim());
            const int c_gt = static_cast<int>(rng() % kNumClasses);
            const std::optional<bool> roof =
                spec.mtl_roof ? std::optional<bool>(rng() % 2 == 0) : std::nullopt;
            const auto ev = head_eval(HeadScores{scores}, spec, c_gt, roof);
            for (size_t i = 0; i < scores.size(); ++i) {
                auto plus = scores;
                auto minus = scores;
                plus[i] += h;
                minus[i] -= h;
                const double numeric =
                    (head_eval(HeadScores{plus}, spec, c_gt, roof).loss.total -
                     head_eval(HeadScores{minus}, spec, c_gt, roof).loss.total) /
                    (2.0 * h);
                const double analytic = ev.grad[i];
                const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-3});
                CHECK(std::abs(analytic - numeric) / denom < 1e-4);
            }
        }
    }
}

TEST_CASE("variant specs resolve partitions and predictions") {
    CHECK_FALSE(VariantSpec::make(Variant::plain, {}, false).gated());
    CHECK(VariantSpec::make(Variant::htc, {6}, false).partition.subset_count() == 2);
    CHECK(VariantSpec::make(Variant::httc, {}, false).partition.subset_count() == 3);
    CHECK(VariantSpec::make(Variant::hyb, {}, false).hybrid());
    CHECK_FALSE(VariantSpec::make(Variant::httc, {}, false).hybrid());

    // HTC(6): classes below 6 against 6 and above
    const auto htc = VariantSpec::make(Variant::htc, {6}, false);
    CHECK(htc.partition.subset_of(5) == 0);
    CHECK(htc.partition.subset_of(6) == 1);

    // plain/argmax vs hybrid/floor-of-expectation
    const auto plain = VariantSpec::make(Variant::plain, {}, false);
    std::vector<double> scores(plain.score_dim(), 0.0);
    scores[9] = 3.0;
    CHECK(head_eval(HeadScores{scores}, plain, 0).prediction == 9);
}
