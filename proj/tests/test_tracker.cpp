#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mtt/baselines.hpp"
#include "mtt/rng.hpp"
#include "mtt/tracker.hpp"

using namespace mtt;

namespace {

TrackerConfig base_config(int n_models = 2, int window = 2) {
    TrackerConfig cfg;
    cfg.models = {make_cv_model("cv-lo", 0.01, 5.0)};
    if (n_models > 1) cfg.models.push_back(make_cv_model("cv-hi", 4.0, 5.0));
    cfg.meas_model = position_measurement(400.0);
    cfg.scoring.p_d = 0.9;
    cfg.scoring.lambda_f = 50.0;
    cfg.scoring.volume = 1.0e9;
    cfg.scoring.gate_gamma = chi2_gate_threshold_2d(1e-4);
    cfg.window = window;
    cfg.enable_birth = false;
    cfg.init.dt = 5.0;
    return cfg;
}

Belief track_belief(double px, double vx, double py, double vy) {
    Vec mean(4);
    mean << px, vx, py, vy;
    Mat cov = Mat::Zero(4, 4);
    cov.diagonal() << 160000.0, 12800.0, 160000.0, 12800.0;
    return make_belief(mean, cov);
}

Scan scan_at(int time, std::vector<Meas> ms) {
    Scan s;
    s.time_index = time;
    s.measurements = std::move(ms);
    return s;
}

Marginals one_hot(int t, int r1, const std::vector<std::pair<int, int>>& assignments, int s) {
    Marginals m;
    m.assoc = Mat::Zero(t, r1 + 1);
    m.model = Mat::Zero(t, s);
    for (Eigen::Index tau = 0; tau < t; ++tau) {
        m.assoc(tau, 0) = 1.0;
        m.model(tau, 0) = 1.0;
    }
    for (auto [tau, r] : assignments) {
        m.assoc(tau, 0) = 0.0;
        m.assoc(tau, r) = 1.0;
    }
    return m;
}

}  // namespace

TEST_CASE("degenerate step equals the plain filter") {
    TrackerConfig cfg = base_config(1, 1);
    Tracker tracker(cfg);
    const Belief b0 = track_belief(30000, -150, 0, 0);
    tracker.add_track(b0, TrackStatus::confirmed);

    const MotionModel& m = cfg.models[0];
    const StateVec xt = m.F * StateVec(b0.mean);
    const Meas z(xt(0) + 120.0, xt(2) - 80.0);
    tracker.step({scan_at(0, {z})});

    const auto [kf_mean, kf_cov] =
        kf_step(b0.mean, b0.cov, m.F, m.Q, cfg.meas_model.H, cfg.meas_model.R, Vec(z));
    CHECK((tracker.tracks()[0].belief.mean - kf_mean).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((tracker.tracks()[0].belief.cov - kf_cov).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("build_stacked_system") {
    std::vector<Track> tracks(2);
    tracks[0].belief = track_belief(0, 0, 0, 0);
    tracks[1].belief = track_belief(10000, 0, 0, 0);
    const TrackerConfig cfg = base_config();
    const Scan scan = scan_at(0, {Meas(0, 0), Meas(10000, 0)});

    SUBCASE("one-hot marginals make a deterministic system") {
        const auto m = one_hot(2, 2, {{0, 1}, {1, 2}}, 2);
        const auto sys = build_stacked_system(tracks, m, cfg.models, cfg.meas_model, scan);
        REQUIRE(sys.h_per_meas.size() == 2);
        // measurement 1 row: all mass on slot 0, zero row has zero probability
        const auto& reals = sys.h_per_meas[0].realizations();
        double zero_mass = 0.0;
        for (const auto& r : reals) {
            if (r.matrix.cwiseAbs().maxCoeff() == 0.0) zero_mass += r.probability;
        }
        CHECK(zero_mass == doctest::Approx(0.0));
        CHECK(mean_matrix(sys.h_per_meas[0]).block(0, 0, 2, 4).isApprox(Mat(cfg.meas_model.H)));
        CHECK(mean_matrix(sys.h_per_meas[0]).block(0, 4, 2, 4).isZero());
    }
    SUBCASE("split association becomes a two-realization row") {
        Marginals m;
        m.assoc = Mat::Zero(2, 3);
        m.model = Mat::Zero(2, 2);
        m.model.col(0).setOnes();
        m.assoc(0, 1) = 0.5;
        m.assoc(1, 1) = 0.5;
        m.assoc(0, 0) = 0.5;
        m.assoc(1, 0) = 0.5;
        m.assoc(0, 2) = 0.0;
        // measurement 2 uncovered -> clutter row with probability 1
        const auto sys = build_stacked_system(tracks, m, cfg.models, cfg.meas_model, scan);
        int nonzero_slots = 0;
        for (const auto& r : sys.h_per_meas[0].realizations())
            if (r.matrix.cwiseAbs().maxCoeff() > 0.0) {
                ++nonzero_slots;
                CHECK(r.probability == doctest::Approx(0.5));
            }
        CHECK(nonzero_slots == 2);
        const auto& clutter = sys.h_per_meas[1].realizations();
        double clutter_mass = 0.0;
        for (const auto& r : clutter)
            if (r.matrix.cwiseAbs().maxCoeff() == 0.0) clutter_mass += r.probability;
        CHECK(clutter_mass == doctest::Approx(1.0));
    }
    SUBCASE("effective measurement block matches the hand formula") {
        Marginals m;
        m.assoc = Mat::Zero(2, 2);
        m.model = Mat::Zero(2, 2);
        m.model.col(0).setOnes();
        m.assoc(0, 1) = 0.5;
        m.assoc(1, 1) = 0.5;
        const Scan one_meas = scan_at(0, {Meas(5000, 0)});
        const auto sys = build_stacked_system(tracks, m, cfg.models, cfg.meas_model, one_meas);

        Rng rng(71);
        Mat a = Mat::NullaryExpr(8, 8, [&]() { return rng.gaussian(); });
        const Mat exx = a * a.transpose();
        const Mat got = effective_meas_cov(sys.h_per_meas[0], exx);

        Mat h1 = Mat::Zero(2, 8), h2 = Mat::Zero(2, 8);
        h1.block(0, 0, 2, 4) = cfg.meas_model.H;
        h2.block(0, 4, 2, 4) = cfg.meas_model.H;
        const Mat h_bar = 0.5 * h1 + 0.5 * h2;
        const Mat expected = Mat(cfg.meas_model.R) +
                             0.5 * (h1 - h_bar) * exx * (h1 - h_bar).transpose() +
                             0.5 * (h2 - h_bar) * exx * (h2 - h_bar).transpose();
        CHECK((got - expected).cwiseAbs().maxCoeff() < 1e-9 * expected.norm());
    }
    SUBCASE("inconsistent marginals are rejected") {
        Marginals m;
        m.assoc = Mat::Zero(2, 3);
        m.model = Mat::Zero(2, 2);
        m.model.col(0).setOnes();
        m.assoc(0, 1) = 0.8;
        m.assoc(1, 1) = 0.8;  // mass 1.6 on one measurement
        CHECK_THROWS(build_stacked_system(tracks, m, cfg.models, cfg.meas_model, scan));
    }
}

TEST_CASE("fast path partition") {
    SUBCASE("all one-hot, distinct targets") {
        const auto m = one_hot(2, 2, {{0, 1}, {1, 2}}, 2);
        const auto part = fast_path_partition(m);
        CHECK(part.exclusive == std::vector<int>{1, 2});
        CHECK(part.shared.empty());
        CHECK(part.applicable);
    }
    SUBCASE("a split measurement is shared") {
        Marginals m;
        m.assoc = Mat::Zero(2, 3);
        m.model = Mat::Zero(2, 2);
        m.assoc(0, 1) = 0.5;
        m.assoc(1, 1) = 0.5;
        m.assoc(0, 2) = 0.5;
        m.assoc(1, 0) = 0.5;
        const auto part = fast_path_partition(m);
        CHECK(part.shared == std::vector<int>{1, 2});
        CHECK(part.exclusive.empty());
        CHECK_FALSE(part.applicable);
    }
    SUBCASE("pure clutter measurements are ignored") {
        const auto m = one_hot(1, 3, {{0, 2}}, 1);
        const auto part = fast_path_partition(m);
        CHECK(part.exclusive == std::vector<int>{2});
        CHECK(part.shared.empty());
    }
}

TEST_CASE("separated targets keep a block-diagonal stacked covariance") {
    TrackerConfig cfg = base_config();
    Tracker tracker(cfg);
    tracker.add_track(track_belief(0, -150, 0, 0), TrackStatus::confirmed);
    tracker.add_track(track_belief(200000, -150, 200000, 0), TrackStatus::confirmed);

    Rng rng(73);
    for (int k = 0; k < 10; ++k) {
        std::vector<Meas> ms;
        for (int t = 0; t < 2; ++t) {
            const Track& tr = tracker.tracks()[static_cast<std::size_t>(t)];
            const StateVec xp = cfg.models[0].F * StateVec(tr.belief.mean);
            ms.emplace_back(xp(0) + rng.gaussian(0, 200), xp(2) + rng.gaussian(0, 200));
        }
        tracker.step({scan_at(k, ms), scan_at(k + 1, {})});
        CHECK(tracker.stacked().p.block(0, 4, 4, 4).cwiseAbs().maxCoeff() <= 1e-9);
    }
}

TEST_CASE("a shared gated measurement couples the stacked covariance") {
    TrackerConfig cfg = base_config();
    Tracker tracker(cfg);
    tracker.add_track(track_belief(0, 0, 0, 0), TrackStatus::confirmed);
    tracker.add_track(track_belief(600, 0, 0, 0), TrackStatus::confirmed);

    // one measurement between the two targets, inside both gates
    tracker.step({scan_at(0, {Meas(300, 0)})});
    CHECK(tracker.stacked().p.block(0, 4, 4, 4).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("fast path and dense update agree") {
    auto run = [](bool fast) {
        TrackerConfig cfg = base_config();
        cfg.use_fast_path = fast;
        Tracker tracker(cfg);
        tracker.add_track(track_belief(0, -150, 0, 0), TrackStatus::confirmed);
        tracker.add_track(track_belief(100000, -150, 100000, 0), TrackStatus::confirmed);
        for (int k = 0; k < 5; ++k) {
            std::vector<Meas> ms;
            for (int t = 0; t < 2; ++t) {
                const Track& tr = tracker.tracks()[static_cast<std::size_t>(t)];
                const StateVec xp = cfg.models[0].F * StateVec(tr.belief.mean);
                ms.emplace_back(xp(0) + 150.0, xp(2) - 90.0);
            }
            tracker.step({scan_at(k, ms)});
        }
        std::vector<Vec> means;
        for (const auto& tr : tracker.tracks()) means.push_back(tr.belief.mean);
        return means;
    };
    const auto with_fast = run(true);
    const auto dense = run(false);
    REQUIRE(with_fast.size() == dense.size());
    for (std::size_t t = 0; t < dense.size(); ++t)
        CHECK((with_fast[t] - dense[t]).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("track management") {
    SUBCASE("repeated misses terminate a confirmed track") {
        TrackerConfig cfg = base_config();
        cfg.n_loss = 3;
        Tracker tracker(cfg);
        tracker.add_track(track_belief(0, 0, 0, 0), TrackStatus::confirmed);
        for (int k = 0; k < 3 + 1; ++k) {
            tracker.step({scan_at(k, {})});
            if (k < 3) CHECK(tracker.tracks()[0].status == TrackStatus::confirmed);
        }
        CHECK(tracker.tracks()[0].status == TrackStatus::terminated);
        CHECK(tracker.stacked().x.size() == 0);

        // terminated tracks never rejoin the association
        tracker.step({scan_at(10, {Meas(0, 0)})});
        CHECK(tracker.tracks()[0].status == TrackStatus::terminated);
    }
    SUBCASE("a soft dummy probability is not a miss") {
        TrackerConfig cfg = base_config();
        cfg.miss_threshold = 0.5;
        Tracker tracker(cfg);
        tracker.add_track(track_belief(0, 0, 0, 0), TrackStatus::confirmed);
        // in-gate measurement keeps the dummy probability low
        tracker.step({scan_at(0, {Meas(50, 20)})});
        CHECK(tracker.tracks()[0].miss_count == 0);
    }
    SUBCASE("two-point birth from a consistent pair") {
        TrackerConfig cfg = base_config();
        cfg.enable_birth = true;
        cfg.confirm_threshold = 0.8;
        Tracker tracker(cfg);
        tracker.step({scan_at(0, {Meas(0, 0)})});
        tracker.step({scan_at(1, {Meas(-700, 30)})});
        REQUIRE_FALSE(tracker.tracks().empty());
        const Track& tr = tracker.tracks().back();
        CHECK(tr.status == TrackStatus::tentative);
        CHECK(tr.belief.mean(0) == doctest::Approx(-700.0));
        CHECK(tr.belief.mean(1) == doctest::Approx(-140.0));  // (z2-z1)/dt
        CHECK(tr.belief.mean(3) == doctest::Approx(6.0));
        CHECK(tr.belief.cov(0, 0) == doctest::Approx(160000.0));
        CHECK(tr.belief.cov(1, 1) == doctest::Approx(2.0 * 160000.0 / 25.0));
    }
}

TEST_CASE("long-run stacked covariance stays positive semidefinite") {
    TrackerConfig cfg = base_config();
    cfg.enable_birth = false;
    Tracker tracker(cfg);
    tracker.add_track(track_belief(0, -100, 0, 0), TrackStatus::confirmed);
    tracker.add_track(track_belief(800, -100, 400, 0), TrackStatus::confirmed);

    Rng rng(83);
    for (int k = 0; k < 200; ++k) {
        std::vector<Meas> ms;
        for (int t = 0; t < 2; ++t) {
            const Track& tr = tracker.tracks()[static_cast<std::size_t>(t)];
            if (tr.status == TrackStatus::terminated) continue;
            const StateVec xp = cfg.models[0].F * StateVec(tr.belief.mean);
            if (rng.bernoulli(0.9))
                ms.emplace_back(xp(0) + rng.gaussian(0, 400), xp(2) + rng.gaussian(0, 400));
        }
        // occasional clutter near the tracks keeps associations fractional
        if (rng.bernoulli(0.5) && !ms.empty())
            ms.emplace_back(ms[0](0) + rng.gaussian(0, 600), ms[0](1) + rng.gaussian(0, 600));
        tracker.step({scan_at(k, ms)});
        const Mat& p = tracker.stacked().p;
        if (p.rows() == 0) break;
        Eigen::SelfAdjointEigenSolver<Mat> eig(p);
        CHECK(eig.eigenvalues().minCoeff() >= -1e-8);
    }
}

TEST_CASE("steps are deterministic for identical inputs") {
    auto run = [] {
        TrackerConfig cfg = base_config();
        cfg.enable_birth = true;
        Tracker tracker(cfg);
        tracker.add_track(track_belief(0, -100, 0, 0), TrackStatus::confirmed);
        Rng rng(97);
        std::vector<Vec> out;
        for (int k = 0; k < 20; ++k) {
            std::vector<Meas> ms;
            for (int m = 0; m < 3; ++m)
                ms.emplace_back(rng.uniform(-5000, 5000), rng.uniform(-5000, 5000));
            tracker.step({scan_at(k, ms), scan_at(k + 1, {})});
            for (const auto& tr : tracker.tracks())
                if (tr.status != TrackStatus::terminated) out.push_back(tr.belief.mean);
        }
        return out;
    };
    const auto a = run();
    const auto b = run();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}
