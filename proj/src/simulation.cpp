#include "mtt/simulation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "mtt/dynamics.hpp"

namespace mtt {

namespace {
constexpr double kDegToRad = M_PI / 180.0;
}

void ScenarioConfig::validate() const {
    if (!(dt > 0.0)) throw std::invalid_argument("ScenarioConfig: dt must be > 0");
    if (!(p_d > 0.0 && p_d <= 1.0)) throw std::invalid_argument("ScenarioConfig: p_d in (0,1]");
    if (lambda_f < 0.0) throw std::invalid_argument("ScenarioConfig: lambda_f must be >= 0");
    if (!(sigma_z > 0.0)) throw std::invalid_argument("ScenarioConfig: sigma_z must be > 0");
    if (segments.empty()) throw std::invalid_argument("ScenarioConfig: no segments");
    if (initial_states.empty()) throw std::invalid_argument("ScenarioConfig: no initial states");
    for (const auto& s : segments)
        if (s.duration < 1) throw std::invalid_argument("ScenarioConfig: segment duration >= 1");
    if (region && !(region->area() > 0.0))
        throw std::invalid_argument("ScenarioConfig: region area must be > 0");
}

ScenarioConfig default_scenario() {
    ScenarioConfig cfg;
    cfg.dt = 5.0;
    cfg.segments = {
        {Segment::Kind::cv, 20, 0.0},
        {Segment::Kind::ct, 18, 1.0 * kDegToRad},
        {Segment::Kind::cv, 12, 0.0},
        {Segment::Kind::ct, 6, -3.0 * kDegToRad},
        {Segment::Kind::cv, 14, 0.0},
    };
    const double v = -150.0;  // westbound
    cfg.initial_states = {
        StateVec(30000.0, v, 0.0, 0.0),
        StateVec(30000.0, v, 1000.0, 0.0),
        StateVec(30000.0, v, 2000.0, 0.0),
    };
    return cfg;
}

GroundTruth generate_truth(const ScenarioConfig& cfg) {
    cfg.validate();
    // states[k] is the configuration after k+1 propagation steps; the initial
    // states themselves are the tracker prior, not an observed step.
    GroundTruth truth;
    std::vector<StateVec> current = cfg.initial_states;

    Rng noise_rng = Rng(cfg.seed).derive(0xA11CE);
    const bool noisy = cfg.truth_noise_q > 0.0;
    Eigen::Matrix4d chol = Eigen::Matrix4d::Zero();
    if (noisy) {
        const Eigen::Matrix4d q = process_noise(cfg.truth_noise_q, cfg.dt);
        chol = Eigen::LLT<Eigen::Matrix4d>(q + 1e-12 * Eigen::Matrix4d::Identity()).matrixL();
    }

    for (const Segment& seg : cfg.segments) {
        const Eigen::Matrix4d f = seg.kind == Segment::Kind::cv
                                      ? cv_transition(cfg.dt)
                                      : ct_transition(seg.omega, cfg.dt);
        for (int k = 0; k < seg.duration; ++k) {
            for (auto& x : current) {
                x = f * x;
                if (noisy) {
                    StateVec w(noise_rng.gaussian(), noise_rng.gaussian(), noise_rng.gaussian(),
                               noise_rng.gaussian());
                    x += chol * w;
                }
            }
            truth.states.push_back(current);
        }
    }
    return truth;
}

Rect auto_region(const GroundTruth& truth, double inflate) {
    if (truth.states.empty()) throw std::invalid_argument("auto_region: empty truth");
    Rect r;
    r.x_min = r.y_min = std::numeric_limits<double>::infinity();
    r.x_max = r.y_max = -std::numeric_limits<double>::infinity();
    for (const auto& step : truth.states) {
        for (const auto& x : step) {
            r.x_min = std::min(r.x_min, x(0));
            r.x_max = std::max(r.x_max, x(0));
            r.y_min = std::min(r.y_min, x(2));
            r.y_max = std::max(r.y_max, x(2));
        }
    }
    r.x_min -= inflate;
    r.x_max += inflate;
    r.y_min -= inflate;
    r.y_max += inflate;
    return r;
}

ScanSet generate_scans(const GroundTruth& truth, const ScenarioConfig& cfg, Rng& rng) {
    cfg.validate();
    if (truth.states.empty()) throw std::invalid_argument("generate_scans: empty truth");

    ScanSet out;
    out.region = cfg.region ? *cfg.region : auto_region(truth);
    out.volume = out.region.area();

    for (std::size_t k = 0; k < truth.states.size(); ++k) {
        Scan scan;
        scan.time_index = static_cast<int>(k);
        std::vector<int> origins;

        for (std::size_t t = 0; t < truth.states[k].size(); ++t) {
            if (!rng.bernoulli(cfg.p_d)) continue;
            const StateVec& x = truth.states[k][t];
            scan.measurements.emplace_back(x(0) + rng.gaussian(0.0, cfg.sigma_z),
                                           x(2) + rng.gaussian(0.0, cfg.sigma_z));
            origins.push_back(static_cast<int>(t));
        }
        const int clutter = rng.poisson(cfg.lambda_f);
        for (int i = 0; i < clutter; ++i) {
            scan.measurements.emplace_back(rng.uniform(out.region.x_min, out.region.x_max),
                                           rng.uniform(out.region.y_min, out.region.y_max));
            origins.push_back(-1);
        }

        // Shuffle measurements and origins with one permutation.
        std::vector<std::size_t> perm(scan.measurements.size());
        for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
        rng.shuffle(perm);
        Scan shuffled;
        shuffled.time_index = scan.time_index;
        std::vector<int> shuffled_origins;
        for (std::size_t i : perm) {
            shuffled.measurements.push_back(scan.measurements[i]);
            shuffled_origins.push_back(origins[i]);
        }
        out.scans.push_back(std::move(shuffled));
        out.origins.push_back(std::move(shuffled_origins));
    }
    return out;
}

}  // namespace mtt
