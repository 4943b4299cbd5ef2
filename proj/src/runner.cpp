#include "mtt/runner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mtt {

AlgorithmKind parse_algorithm(const std::string& name) {
    if (name == "rmm-mht") return AlgorithmKind::rmm_mht;
    if (name == "imm-mht") return AlgorithmKind::imm_mht;
    if (name == "imm") return AlgorithmKind::imm;
    if (name == "kf-oracle") return AlgorithmKind::kf_oracle;
    throw std::invalid_argument("unknown algorithm: " + name);
}

Mat transition_p1() {
    Mat p(2, 2);
    p << 0.95, 0.05, 0.1, 0.9;
    return p;
}

Mat transition_p2() {
    Mat p(2, 2);
    p << 0.95, 0.05, 0.2, 0.8;
    return p;
}

Mat transition_p3() {
    Mat p(2, 2);
    p << 0.95, 0.05, 0.3, 0.7;
    return p;
}

ModelSet default_models(const RunnerParams& params) {
    ModelSet models;
    for (std::size_t i = 0; i < params.model_q.size(); ++i)
        models.push_back(make_cv_model("cv-q" + std::to_string(params.model_q[i]),
                                       params.model_q[i], params.scenario.dt));
    if (models.empty()) throw std::invalid_argument("default_models: no model noise levels");
    return models;
}

TrackerConfig make_tracker_config(const RunnerParams& params, double volume) {
    TrackerConfig cfg;
    cfg.models = default_models(params);
    cfg.meas_model = position_measurement(params.scenario.sigma_z);
    cfg.scoring.p_d = std::min(params.scenario.p_d, 1.0 - 1e-9);
    cfg.scoring.lambda_f = std::max(params.scenario.lambda_f, 0.1);
    cfg.scoring.lambda_v = params.lambda_v;
    cfg.scoring.volume = volume;
    cfg.scoring.gate_gamma = chi2_gate_threshold_2d(params.gate_exclusion);
    cfg.window = params.window;
    cfg.hypothesis_cap = params.hypothesis_cap;
    cfg.miss_threshold = params.miss_threshold;
    cfg.n_loss = params.n_loss;
    cfg.confirm_score = params.confirm_score;
    cfg.confirm_threshold = params.confirm_threshold;
    cfg.enable_birth = params.enable_birth;
    cfg.max_new_tracks = params.max_new_tracks;
    cfg.init.dt = params.scenario.dt;
    cfg.init.max_speed = 500.0;
    cfg.init.speed_std = 150.0;
    cfg.init.process_q = *std::max_element(params.model_q.begin(), params.model_q.end());
    cfg.lp_dump = params.lp_dump;
    return cfg;
}

namespace {

Mat initial_covariance(const ScenarioConfig& sc) {
    const double var_p = sc.sigma_z * sc.sigma_z;
    const double var_v = 2.0 * var_p / (sc.dt * sc.dt);
    Mat cov = Mat::Zero(4, 4);
    cov.diagonal() << var_p, var_v, var_p, var_v;
    return cov;
}

std::vector<Meas> truth_positions(const GroundTruth& truth, int step) {
    std::vector<Meas> out;
    for (const auto& x : truth.states[static_cast<std::size_t>(step)]) out.emplace_back(x(0), x(2));
    return out;
}

std::vector<Scan> make_window(const std::vector<Scan>& scans, int k, int window) {
    const int end = std::min<int>(k + window, static_cast<int>(scans.size()));
    return std::vector<Scan>(scans.begin() + k, scans.begin() + end);
}

RunResult run_rmm(const RunnerParams& params, const GroundTruth& truth, const ScanSet& scans,
                  const OspaParams& ospa_params, const StepObserver* observer) {
    TrackerConfig cfg = make_tracker_config(params, scans.volume);
    Tracker tracker(cfg);
    if (params.init_from_truth)
        for (const StateVec& x : params.scenario.initial_states)
            tracker.add_track(make_belief(Vec(x), initial_covariance(params.scenario)),
                              TrackStatus::confirmed);

    RunResult result;
    for (int k = 0; k < static_cast<int>(scans.scans.size()); ++k) {
        const StepDiagnostics diag = tracker.step(make_window(scans.scans, k, params.window));
        const std::vector<Meas> est = tracker.confirmed_positions();
        const std::vector<Meas> tru = truth_positions(truth, k);
        result.ospa_per_step.push_back(ospa(tru, est, ospa_params));
        result.n_truth.push_back(static_cast<int>(tru.size()));
        result.n_tracks.push_back(static_cast<int>(est.size()));
        if (observer) {
            std::vector<TrackSnapshot> snaps;
            for (const Track& tr : tracker.tracks()) {
                if (tr.status == TrackStatus::terminated) continue;
                snaps.push_back(TrackSnapshot{tr.id, tr.status, tr.belief.mean});
            }
            (*observer)(k, snaps, diag);
        }
    }
    return result;
}

RunResult run_imm_mht(const AlgorithmSpec& spec, const RunnerParams& params,
                      const GroundTruth& truth, const ScanSet& scans,
                      const OspaParams& ospa_params, const StepObserver* observer) {
    TrackerConfig cfg = make_tracker_config(params, scans.volume);
    ImmMhtTracker tracker(cfg, spec.pij);
    if (params.init_from_truth)
        for (const StateVec& x : params.scenario.initial_states)
            tracker.add_track(Vec(x), initial_covariance(params.scenario), TrackStatus::confirmed);

    RunResult result;
    for (int k = 0; k < static_cast<int>(scans.scans.size()); ++k) {
        const StepDiagnostics diag = tracker.step(make_window(scans.scans, k, params.window));
        const std::vector<Meas> est = tracker.confirmed_positions();
        const std::vector<Meas> tru = truth_positions(truth, k);
        result.ospa_per_step.push_back(ospa(tru, est, ospa_params));
        result.n_truth.push_back(static_cast<int>(tru.size()));
        result.n_tracks.push_back(static_cast<int>(est.size()));
        if (observer) {
            std::vector<TrackSnapshot> snaps;
            for (const ImmTrack& tr : tracker.tracks()) {
                if (tr.status == TrackStatus::terminated) continue;
                snaps.push_back(TrackSnapshot{tr.id, tr.status, imm_combine(tr.belief).first});
            }
            (*observer)(k, snaps, diag);
        }
    }
    return result;
}

// Oracle-association baselines: each target is updated with its own
// detection (known origins), so only estimation quality is measured.
RunResult run_oracle(const AlgorithmSpec& spec, const RunnerParams& params,
                     const GroundTruth& truth, const ScanSet& scans,
                     const OspaParams& ospa_params, const StepObserver* observer) {
    const ModelSet models = default_models(params);
    const MeasurementModel mm = position_measurement(params.scenario.sigma_z);
    const int t = truth.targets();
    const Mat p0 = initial_covariance(params.scenario);

    std::vector<ImmBelief> imm_tracks;
    std::vector<std::pair<Vec, Mat>> kf_tracks;
    const MotionModel& kf_model = models.back();
    for (int i = 0; i < t; ++i) {
        const Vec x0 = Vec(params.scenario.initial_states[static_cast<std::size_t>(i)]);
        imm_tracks.push_back(make_imm_belief(x0, p0, static_cast<int>(models.size())));
        kf_tracks.emplace_back(x0, p0);
    }

    RunResult result;
    for (int k = 0; k < static_cast<int>(scans.scans.size()); ++k) {
        const Scan& scan = scans.scans[static_cast<std::size_t>(k)];
        const auto& origins = scans.origins[static_cast<std::size_t>(k)];
        std::vector<Meas> est;
        std::vector<TrackSnapshot> snaps;
        for (int i = 0; i < t; ++i) {
            int found = -1;
            for (std::size_t m = 0; m < origins.size(); ++m)
                if (origins[m] == i) found = static_cast<int>(m);
            if (spec.kind == AlgorithmKind::imm) {
                ImmBelief& b = imm_tracks[static_cast<std::size_t>(i)];
                b = found >= 0 ? imm_step(b, spec.pij, models, mm,
                                          scan.measurements[static_cast<std::size_t>(found)])
                               : imm_predict_only(b, models);
                const Vec mean = imm_combine(b).first;
                est.emplace_back(mean(0), mean(2));
                if (observer) snaps.push_back(TrackSnapshot{i + 1, TrackStatus::confirmed, mean});
            } else {
                auto& [mean, cov] = kf_tracks[static_cast<std::size_t>(i)];
                if (found >= 0) {
                    std::tie(mean, cov) =
                        kf_step(mean, cov, kf_model.F, kf_model.Q, mm.H, mm.R,
                                scan.measurements[static_cast<std::size_t>(found)]);
                } else {
                    mean = kf_model.F * mean;
                    cov = symmetrize(kf_model.F * cov * kf_model.F.transpose() + kf_model.Q);
                }
                est.emplace_back(mean(0), mean(2));
                if (observer) snaps.push_back(TrackSnapshot{i + 1, TrackStatus::confirmed, mean});
            }
        }
        const std::vector<Meas> tru = truth_positions(truth, k);
        result.ospa_per_step.push_back(ospa(tru, est, ospa_params));
        result.n_truth.push_back(static_cast<int>(tru.size()));
        result.n_tracks.push_back(static_cast<int>(est.size()));
        if (observer) (*observer)(k, snaps, StepDiagnostics{});
    }
    return result;
}

}  // namespace

RunResult run_algorithm(const AlgorithmSpec& spec, const RunnerParams& params,
                        std::uint64_t seed, const StepObserver* observer) {
    ScenarioConfig sc = params.scenario;
    sc.seed = seed;
    sc.validate();
    const GroundTruth truth = generate_truth(sc);
    Rng rng(seed);
    const ScanSet scans = generate_scans(truth, sc, rng);

    RunnerParams local = params;
    local.scenario = sc;
    switch (spec.kind) {
        case AlgorithmKind::rmm_mht:
            return run_rmm(local, truth, scans, params.ospa, observer);
        case AlgorithmKind::imm_mht:
            return run_imm_mht(spec, local, truth, scans, params.ospa, observer);
        case AlgorithmKind::imm:
        case AlgorithmKind::kf_oracle:
            return run_oracle(spec, local, truth, scans, params.ospa, observer);
    }
    throw std::logic_error("run_algorithm: unreachable");
}

MonteCarloResult compare_algorithms(const std::vector<AlgorithmSpec>& specs,
                                    const RunnerParams& params, int runs) {
    std::vector<Algorithm> algorithms;
    for (const AlgorithmSpec& spec : specs) {
        algorithms.push_back(Algorithm{
            spec.name,
            [spec, params](std::uint64_t seed) { return run_algorithm(spec, params, seed); }});
    }
    return monte_carlo(algorithms, params.scenario.seed, runs);
}

}  // namespace mtt
