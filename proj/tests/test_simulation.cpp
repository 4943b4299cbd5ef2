#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mtt/simulation.hpp"

using namespace mtt;

TEST_CASE("default preset geometry") {
    const ScenarioConfig cfg = default_scenario();
    const GroundTruth truth = generate_truth(cfg);

    SUBCASE("seventy steps, three targets, 1000 m spacing") {
        CHECK(truth.steps() == 70);
        CHECK(truth.targets() == 3);
        CHECK(cfg.initial_states[1](2) - cfg.initial_states[0](2) == doctest::Approx(1000.0));
        CHECK(cfg.initial_states[2](2) - cfg.initial_states[1](2) == doctest::Approx(1000.0));
    }
    SUBCASE("straight-line motion in the first leg") {
        for (int k = 0; k < 20; ++k) {
            const StateVec& x = truth.states[static_cast<std::size_t>(k)][0];
            CHECK(x(0) == doctest::Approx(30000.0 - 150.0 * 5.0 * (k + 1)).epsilon(1e-12));
            CHECK(x(2) == doctest::Approx(0.0));
        }
    }
    SUBCASE("the first turn rotates the heading by exactly ninety degrees") {
        const StateVec& before = truth.states[19][0];  // end of the CV leg
        const StateVec& after = truth.states[19 + 18][0];
        const double angle_before = std::atan2(before(3), before(1));
        const double angle_after = std::atan2(after(3), after(1));
        double delta = angle_after - angle_before;
        while (delta > M_PI) delta -= 2.0 * M_PI;
        while (delta < -M_PI) delta += 2.0 * M_PI;
        CHECK(delta == doctest::Approx(M_PI / 2.0).epsilon(1e-9));
        // speed is preserved through the turn
        CHECK(std::hypot(after(1), after(3)) == doctest::Approx(150.0).epsilon(1e-9));
    }
    SUBCASE("final leg heads west again") {
        const StateVec& last = truth.states.back()[0];
        CHECK(last(1) < -149.0);
        CHECK(std::abs(last(3)) < 1.0);
    }
}

TEST_CASE("truth with process noise differs but stays seeded") {
    ScenarioConfig cfg = default_scenario();
    cfg.truth_noise_q = 0.5;
    const GroundTruth a = generate_truth(cfg);
    const GroundTruth b = generate_truth(cfg);
    CHECK(a.states[10][0] == b.states[10][0]);
    cfg.seed = 99;
    const GroundTruth c = generate_truth(cfg);
    CHECK(a.states[10][0] != c.states[10][0]);
}

TEST_CASE("auto region inflates the bounding box") {
    const GroundTruth truth = generate_truth(default_scenario());
    const Rect r = auto_region(truth, 2000.0);
    double x_min = 1e18, x_max = -1e18;
    for (const auto& step : truth.states)
        for (const auto& x : step) {
            x_min = std::min(x_min, x(0));
            x_max = std::max(x_max, x(0));
        }
    CHECK(r.x_min == doctest::Approx(x_min - 2000.0));
    CHECK(r.x_max == doctest::Approx(x_max + 2000.0));
    CHECK(r.area() > 0.0);
}

TEST_CASE("scan generation") {
    SUBCASE("perfect detection, no clutter") {
        ScenarioConfig cfg = default_scenario();
        cfg.p_d = 1.0;
        cfg.lambda_f = 0.0;
        const GroundTruth truth = generate_truth(cfg);
        Rng rng(cfg.seed);
        const ScanSet scans = generate_scans(truth, cfg, rng);
        for (const Scan& s : scans.scans) CHECK(s.count() == 3);
        for (const auto& origins : scans.origins)
            for (int o : origins) CHECK(o >= 0);
    }
    SUBCASE("fixed seed reproduces scans exactly") {
        const ScenarioConfig cfg = default_scenario();
        const GroundTruth truth = generate_truth(cfg);
        Rng r1(42), r2(42);
        const ScanSet a = generate_scans(truth, cfg, r1);
        const ScanSet b = generate_scans(truth, cfg, r2);
        REQUIRE(a.scans.size() == b.scans.size());
        for (std::size_t k = 0; k < a.scans.size(); ++k) {
            REQUIRE(a.scans[k].count() == b.scans[k].count());
            for (int r = 1; r <= a.scans[k].count(); ++r)
                CHECK(a.scans[k].at(r) == b.scans[k].at(r));
        }
    }
    SUBCASE("empirical detection rate within three binomial errors") {
        ScenarioConfig cfg = default_scenario();
        cfg.lambda_f = 0.0;
        cfg.segments = {{Segment::Kind::cv, 3400, 0.0}};
        const GroundTruth truth = generate_truth(cfg);
        Rng rng(7);
        const ScanSet scans = generate_scans(truth, cfg, rng);
        long detections = 0;
        long chances = 0;
        for (const auto& origins : scans.origins) {
            detections += static_cast<long>(origins.size());
            chances += 3;
        }
        const double rate = static_cast<double>(detections) / static_cast<double>(chances);
        const double se = std::sqrt(0.9 * 0.1 / static_cast<double>(chances));
        CHECK(std::abs(rate - 0.9) <= 3.0 * se);
    }
    SUBCASE("clutter count concentrates around lambda_f") {
        ScenarioConfig cfg = default_scenario();
        cfg.p_d = 1e-9;  // isolate the clutter stream
        cfg.segments = {{Segment::Kind::cv, 10000, 0.0}};
        const GroundTruth truth = generate_truth(cfg);
        Rng rng(11);
        const ScanSet scans = generate_scans(truth, cfg, rng);
        double total = 0.0;
        for (const auto& origins : scans.origins) {
            for (int o : origins) CHECK(o == -1);
            total += static_cast<double>(origins.size());
        }
        const double mean = total / static_cast<double>(scans.scans.size());
        const double se = std::sqrt(50.0 / static_cast<double>(scans.scans.size()));
        CHECK(std::abs(mean - 50.0) <= 3.0 * se);
    }
    SUBCASE("measurement noise sample covariance within five percent") {
        ScenarioConfig cfg = default_scenario();
        cfg.p_d = 1.0;
        cfg.lambda_f = 0.0;
        cfg.segments = {{Segment::Kind::cv, 34000, 0.0}};
        const GroundTruth truth = generate_truth(cfg);
        Rng rng(13);
        const ScanSet scans = generate_scans(truth, cfg, rng);
        double sxx = 0.0, syy = 0.0, sxy = 0.0;
        long n = 0;
        for (std::size_t k = 0; k < scans.scans.size(); ++k) {
            for (int r = 1; r <= scans.scans[k].count(); ++r) {
                const int t = scans.origins[k][static_cast<std::size_t>(r - 1)];
                const StateVec& x = truth.states[k][static_cast<std::size_t>(t)];
                const double ex = scans.scans[k].at(r)(0) - x(0);
                const double ey = scans.scans[k].at(r)(1) - x(2);
                sxx += ex * ex;
                syy += ey * ey;
                sxy += ex * ey;
                ++n;
            }
        }
        const double var = 400.0 * 400.0;
        CHECK(std::abs(sxx / n - var) <= 0.05 * var);
        CHECK(std::abs(syy / n - var) <= 0.05 * var);
        CHECK(std::abs(sxy / n) <= 0.05 * var);
    }
}
