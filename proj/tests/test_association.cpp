#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mtt/association.hpp"
#include "mtt/dynamics.hpp"
#include "mtt/rng.hpp"
#include "oracles.hpp"

using namespace mtt;

namespace {

LocalHypothesis hyp(int target, std::vector<int> models, std::vector<int> meas, double cost) {
    LocalHypothesis h;
    h.target = target;
    h.models = std::move(models);
    h.meas = std::move(meas);
    h.cost = cost;
    h.log_likelihood = -cost;
    return h;
}

AssociationProblem spec_example() {
    AssociationProblem p;
    p.num_targets = 1;
    p.window = 1;
    p.meas_counts = {1};
    p.hypotheses.push_back(hyp(1, {1}, {1}, 2.0));
    p.hypotheses.push_back(hyp(1, {1}, {0}, 5.0));
    p.hypotheses.push_back(hyp(0, {1}, {1}, 0.0));
    return p;
}

}  // namespace

TEST_CASE("build_lp structure") {
    SUBCASE("three-variable example") {
        const auto lp = build_lp(spec_example());
        CHECK(lp.a.rows() == 2);  // one target row + one measurement row
        CHECK(lp.a.cols() == 3);
        CHECK(lp.a(0, 0) == 1.0);
        CHECK(lp.a(0, 1) == 1.0);
        CHECK(lp.a(0, 2) == 0.0);
        CHECK(lp.a(1, 0) == 1.0);
        CHECK(lp.a(1, 1) == 0.0);
        CHECK(lp.a(1, 2) == 1.0);
        CHECK(lp.b.isOnes());
    }
    SUBCASE("empty scan with one target") {
        AssociationProblem p;
        p.num_targets = 1;
        p.window = 1;
        p.meas_counts = {0};
        p.hypotheses.push_back(hyp(1, {1}, {0}, 3.5));
        const auto lp = build_lp(p);
        CHECK(lp.a.rows() == 1);
        CHECK(lp.a.cols() == 1);
        const auto sol = solve_lp(lp);
        CHECK(sol.probs[0] == doctest::Approx(1.0));
        CHECK(sol.objective == doctest::Approx(3.5));
    }
    SUBCASE("structural audit on random instances") {
        Rng rng(7);
        for (int iter = 0; iter < 30; ++iter) {
            const int n = 1 + static_cast<int>(rng.index(2));
            std::vector<int> r;
            for (int i = 0; i < n; ++i) r.push_back(1 + static_cast<int>(rng.index(3)));
            const auto p = oracles::random_instance(rng, 2, 2, n, r);
            const auto lp = build_lp(p);
            for (Eigen::Index i = 0; i < lp.a.rows(); ++i)
                for (Eigen::Index j = 0; j < lp.a.cols(); ++j)
                    CHECK((lp.a(i, j) == 0.0 || lp.a(i, j) == 1.0));
            for (Eigen::Index j = 0; j < lp.a.cols(); ++j)
                CHECK(lp.a.col(j).sum() <= 1 + n);
        }
    }
    SUBCASE("uncovered measurement is named") {
        AssociationProblem p;
        p.num_targets = 1;
        p.window = 1;
        p.meas_counts = {2};
        p.hypotheses.push_back(hyp(1, {1}, {0}, 1.0));
        p.hypotheses.push_back(hyp(0, {1}, {1}, 0.0));
        try {
            build_lp(p);
            FAIL("expected construction error");
        } catch (const std::invalid_argument& e) {
            CHECK(std::string(e.what()).find("meas 2") != std::string::npos);
        }
    }
}

TEST_CASE("solve_lp") {
    SUBCASE("spec example vertex") {
        const auto p = spec_example();
        const auto sol = solve_lp(build_lp(p));
        CHECK(sol.objective == doctest::Approx(2.0));
        CHECK(sol.probs[0] == doctest::Approx(1.0));
        CHECK(sol.probs[1] == doctest::Approx(0.0));
        CHECK(sol.probs[2] == doctest::Approx(0.0));
        CHECK(sol.is_integral);
    }
    SUBCASE("determinism") {
        Rng rng(19);
        const auto p = oracles::random_instance(rng, 2, 2, 2, {2, 2});
        const auto lp = build_lp(p);
        const auto s1 = solve_lp(lp);
        const auto s2 = solve_lp(lp);
        CHECK(s1.probs == s2.probs);
        CHECK(s1.objective == s2.objective);
    }
    SUBCASE("single-scan instances come back integral") {
        Rng rng(29);
        for (int iter = 0; iter < 200; ++iter) {
            const int t = 1 + static_cast<int>(rng.index(3));
            const int s = 1 + static_cast<int>(rng.index(2));
            const std::vector<int> r = {1 + static_cast<int>(rng.index(4))};
            const auto p = oracles::random_instance(rng, t, s, 1, r);
            const auto sol = solve_lp(build_lp(p));
            for (double v : sol.probs)
                CHECK(std::abs(v - std::round(v)) <= 1e-9);
        }
    }
    SUBCASE("constraint residuals within 1e-8") {
        Rng rng(37);
        for (int iter = 0; iter < 50; ++iter) {
            const auto p = oracles::random_instance(rng, 2, 2, 2, {2, 2});
            const auto lp = build_lp(p);
            const auto sol = solve_lp(lp);
            Vec x(static_cast<Eigen::Index>(sol.probs.size()));
            for (std::size_t j = 0; j < sol.probs.size(); ++j)
                x(static_cast<Eigen::Index>(j)) = sol.probs[j];
            CHECK((lp.a * x - lp.b).cwiseAbs().maxCoeff() <= 1e-8);
        }
    }
}

TEST_CASE("solve_ip") {
    SUBCASE("integral relaxation is returned unchanged") {
        const auto p = spec_example();
        const auto lp = build_lp(p);
        const auto relax = solve_lp(lp);
        const auto exact = solve_ip(lp);
        REQUIRE(relax.is_integral);
        CHECK(exact.objective == doctest::Approx(relax.objective).epsilon(1e-12));
        CHECK(exact.optimal);
    }
    SUBCASE("strict gap detected on the contested-measurement family") {
        Rng rng(47);
        int gaps = 0;
        for (int iter = 0; iter < 50; ++iter) {
            const auto p = oracles::overlap_instance(rng);
            const auto lp = build_lp(p);
            const auto relax = solve_lp(lp);
            const auto exact = solve_ip(lp);
            const double oracle = oracles::exhaustive_optimum(p);
            CHECK(exact.objective == doctest::Approx(oracle).epsilon(1e-9));
            CHECK(relax.objective <= exact.objective + 1e-9);
            if (exact.objective - relax.objective > 1e-6) ++gaps;
        }
        CHECK(gaps > 0);
    }
    SUBCASE("matches exhaustive enumeration on random windows") {
        Rng rng(53);
        for (int iter = 0; iter < 80; ++iter) {
            const int t = 1 + static_cast<int>(rng.index(3));
            const int n = 1 + static_cast<int>(rng.index(2));
            std::vector<int> r;
            for (int i = 0; i < n; ++i) r.push_back(1 + static_cast<int>(rng.index(3)));
            const auto p = oracles::random_instance(rng, t, 1 + static_cast<int>(rng.index(2)), n, r);
            const auto exact = solve_ip(build_lp(p));
            CHECK(exact.objective ==
                  doctest::Approx(oracles::exhaustive_optimum(p)).epsilon(1e-9));
        }
    }
    SUBCASE("node budget exhaustion is flagged") {
        Rng rng(59);
        const auto p = oracles::overlap_instance(rng);
        const auto sol = solve_ip(build_lp(p), 1);
        CHECK_FALSE(sol.optimal);
    }
}

TEST_CASE("marginals") {
    SUBCASE("integral solutions give one-hot rows") {
        const auto p = spec_example();
        const auto sol = solve_lp(build_lp(p));
        const auto m = marginals(p, sol);
        CHECK(m.assoc(0, 1) == doctest::Approx(1.0));
        CHECK(m.assoc(0, 0) == doctest::Approx(0.0));
    }
    SUBCASE("fractional mixture sums per target") {
        AssociationProblem p;
        p.num_targets = 1;
        p.window = 1;
        p.meas_counts = {2};
        p.hypotheses.push_back(hyp(1, {1}, {1}, 1.0));
        p.hypotheses.push_back(hyp(1, {2}, {2}, 1.0));
        p.hypotheses.push_back(hyp(0, {1}, {1}, 0.0));
        p.hypotheses.push_back(hyp(0, {1}, {2}, 0.0));
        AssociationSolution sol;
        sol.probs = {0.6, 0.4, 0.4, 0.6};
        const auto m = marginals(p, sol);
        CHECK(m.assoc(0, 0) == doctest::Approx(0.0));
        CHECK(m.assoc(0, 1) == doctest::Approx(0.6));
        CHECK(m.assoc(0, 2) == doctest::Approx(0.4));
        CHECK(m.model(0, 0) == doctest::Approx(0.6));
        CHECK(m.model(0, 1) == doctest::Approx(0.4));
    }
    SUBCASE("rows of LP solutions sum to one") {
        Rng rng(61);
        for (int iter = 0; iter < 30; ++iter) {
            const auto p = oracles::random_instance(rng, 2, 2, 2, {2, 2});
            const auto sol = solve_lp(build_lp(p));
            const auto m = marginals(p, sol);
            for (Eigen::Index tau = 0; tau < m.assoc.rows(); ++tau) {
                CHECK(m.assoc.row(tau).sum() == doctest::Approx(1.0).epsilon(1e-8));
                CHECK(m.model.row(tau).sum() == doctest::Approx(1.0).epsilon(1e-8));
            }
        }
    }
}

TEST_CASE("check_prop2") {
    AssociationProblem p;
    p.num_targets = 2;
    p.window = 1;
    p.meas_counts = {2};
    p.hypotheses.push_back(hyp(1, {1}, {1}, 1.0));  // target 1 minimum
    p.hypotheses.push_back(hyp(1, {1}, {0}, 4.0));
    p.hypotheses.push_back(hyp(2, {1}, {2}, 0.5));  // target 2 minimum
    p.hypotheses.push_back(hyp(2, {1}, {0}, 2.0));
    p.hypotheses.push_back(hyp(0, {1}, {1}, 0.0));
    p.hypotheses.push_back(hyp(0, {1}, {2}, 0.0));

    AssociationSolution minima;
    minima.probs = {1, 0, 1, 0, 0, 0};
    CHECK(check_prop2(p, minima));

    AssociationSolution off_minimum;
    off_minimum.probs = {0, 1, 1, 0, 1, 0};
    CHECK_FALSE(check_prop2(p, off_minimum));

    // a nonzero dummy-target cost breaks the condition
    auto p_bad = p;
    p_bad.hypotheses[4].cost = 0.3;
    CHECK_FALSE(check_prop2(p_bad, minima));

    // whenever the condition holds, relaxation and exact optimum coincide
    const auto lp = build_lp(p);
    CHECK(solve_lp(lp).objective == doctest::Approx(solve_ip(lp).objective).epsilon(1e-9));
}

TEST_CASE("track_init_lp") {
    const MeasurementModel mm = position_measurement(400.0);
    ScoringParams params;
    params.volume = 1.0e9;
    params.gate_gamma = chi2_gate_threshold_2d(1e-4);
    InitParams init;
    init.dt = 5.0;

    auto scan_with = [](std::vector<Meas> ms, int t) {
        Scan s;
        s.time_index = t;
        s.measurements = std::move(ms);
        return s;
    };

    SUBCASE("one consistent pair, no competition") {
        const auto cands = track_init_lp(
            {scan_with({Meas(0, 0)}, 0), scan_with({Meas(-700, 30)}, 1)}, mm, params, init);
        REQUIRE_FALSE(cands.empty());
        bool pair_found = false;
        for (const auto& c : cands) {
            if (c.meas == std::vector<int>{1, 1}) {
                CHECK(c.probability == doctest::Approx(1.0).epsilon(1e-9));
                pair_found = true;
            }
        }
        CHECK(pair_found);
    }
    SUBCASE("two disjoint pairs both selected") {
        const auto cands = track_init_lp(
            {scan_with({Meas(0, 0), Meas(50000, 50000)}, 0),
             scan_with({Meas(-700, 30), Meas(49400, 50020)}, 1)},
            mm, params, init);
        int winners = 0;
        for (const auto& c : cands) {
            int real = 0;
            for (int r : c.meas)
                if (r > 0) ++real;
            if (real == 2 && c.probability > 1.0 - 1e-9) ++winners;
        }
        CHECK(winners == 2);
    }
    SUBCASE("competing pairs split probability, coverage sums to one") {
        const auto cands = track_init_lp(
            {scan_with({Meas(0, 0), Meas(400, 0)}, 0), scan_with({Meas(-650, 0)}, 1)}, mm, params,
            init);
        double scan2_mass = 0.0;
        for (const auto& c : cands)
            if (c.meas[1] == 1) scan2_mass += c.probability;
        CHECK(scan2_mass == doctest::Approx(1.0).epsilon(1e-8));
        for (const auto& c : cands) {
            CHECK(c.probability >= -1e-9);
            CHECK(c.probability <= 1.0 + 1e-9);
        }
    }
    SUBCASE("no measurements means no candidates") {
        CHECK(track_init_lp({scan_with({}, 0), scan_with({}, 1)}, mm, params, init).empty());
    }
    SUBCASE("speed gate prunes impossible pairs") {
        const auto cands = track_init_lp(
            {scan_with({Meas(0, 0)}, 0), scan_with({Meas(100000, 0)}, 1)}, mm, params, init);
        for (const auto& c : cands) {
            int real = 0;
            for (int r : c.meas)
                if (r > 0) ++real;
            CHECK(real <= 1);
        }
    }
}

TEST_CASE("lp debug dump") {
    const auto lp = build_lp(spec_example());
    std::ostringstream os;
    dump_lp(lp, os);
    const std::string text = os.str();
    CHECK(text.find("minimize 2 5 0") != std::string::npos);
    CHECK(text.find("target 1: 1 1 0 = 1") != std::string::npos);
    CHECK(text.find("scan 1 meas 1: 1 0 1 = 1") != std::string::npos);
}
