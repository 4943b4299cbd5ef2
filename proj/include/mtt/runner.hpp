#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mtt/baselines.hpp"
#include "mtt/evaluation.hpp"
#include "mtt/simulation.hpp"
#include "mtt/tracker.hpp"

namespace mtt {

enum class AlgorithmKind { rmm_mht, imm_mht, imm, kf_oracle };

// rmm-mht ignores the transition matrix; imm / imm-mht require one.
struct AlgorithmSpec {
    AlgorithmKind kind = AlgorithmKind::rmm_mht;
    std::string name = "rmm-mht";
    Mat pij;
};

AlgorithmKind parse_algorithm(const std::string& name);

// The mode transition matrices used in the comparison study.
Mat transition_p1();
Mat transition_p2();
Mat transition_p3();

struct RunnerParams {
    ScenarioConfig scenario;
    OspaParams ospa;
    int window = 2;
    int hypothesis_cap = 200;
    int n_loss = 3;
    double confirm_score = 4.0;
    double miss_threshold = 0.5;
    double confirm_threshold = 0.8;
    double lambda_v = 1e-4;
    double gate_exclusion = 1e-4;
    std::vector<double> model_q = {0.01, 4.0};  // CV model noise intensities
    bool init_from_truth = true;
    bool enable_birth = true;
    int max_new_tracks = 8;
    std::ostream* lp_dump = nullptr;
};

// Model set and measurement model implied by the parameters.
ModelSet default_models(const RunnerParams& params);
TrackerConfig make_tracker_config(const RunnerParams& params, double volume);

struct TrackSnapshot {
    int id = 0;
    TrackStatus status = TrackStatus::confirmed;
    Vec mean;
};

using StepObserver =
    std::function<void(int step, const std::vector<TrackSnapshot>&, const StepDiagnostics&)>;

// One full tracking run of the scenario with the given replica seed;
// per-step OSPA against the ground truth.
RunResult run_algorithm(const AlgorithmSpec& spec, const RunnerParams& params,
                        std::uint64_t seed, const StepObserver* observer = nullptr);

// evaluation::monte_carlo wired to run_algorithm for each listed algorithm.
MonteCarloResult compare_algorithms(const std::vector<AlgorithmSpec>& specs,
                                    const RunnerParams& params, int runs);

}  // namespace mtt
