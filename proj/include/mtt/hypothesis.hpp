#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mtt/dynamics.hpp"
#include "mtt/rcmkf.hpp"

namespace mtt {

// One scan of position measurements. Measurement indices are 1-based in
// hypothesis tuples; index 0 is the dummy measurement, so measurements[r-1]
// is the vector for index r.
struct Scan {
    int time_index = 0;
    std::vector<Meas> measurements;

    int count() const { return static_cast<int>(measurements.size()); }
    const Meas& at(int r) const { return measurements.at(static_cast<std::size_t>(r - 1)); }
};

// Local hypothesis (target, model sequence, measurement sequence) over the
// window, with cost = -log likelihood. target 0 is the dummy target.
struct LocalHypothesis {
    int target = 0;
    std::vector<int> models;
    std::vector<int> meas;
    double cost = 0.0;
    double log_likelihood = 0.0;
};

struct ScoringParams {
    double p_d = 0.9;          // detection probability, in (0,1)
    double lambda_f = 50.0;    // expected clutter count per scan, > 0
    double lambda_v = 1e-4;    // expected new-track count per scan
    double volume = 1.0;       // surveillance area (m^2), > 0
    double gate_gamma = 18.420680743952367;  // chi-square gate, 2 dof

    void validate() const;
};

// Gate threshold for a 2-dof chi-square test excluding the target-derived
// measurement with the given probability: gamma = -2 ln(p_exclude).
double chi2_gate_threshold_2d(double exclusion_prob);

// Indices r with (z_r - zhat)' S^-1 (z_r - zhat) <= gamma, dummy index 0
// always included (and always first). S must be symmetric positive definite.
std::vector<int> gate(const Meas& predicted_z, const Eigen::Matrix2d& s, const Scan& scan,
                      double gamma);

// Log-likelihood and cost of an existing-track hypothesis. Predictions use
// the pure chain x_n = F^(s_n) ... F^(s_1) x with covariance propagated the
// same way (no measurement updates inside the window).
std::pair<double, double> score_hypothesis(const Belief& track_state,
                                           const std::vector<int>& model_seq,
                                           const std::vector<int>& meas_seq,
                                           const std::vector<Scan>& scans,
                                           const ModelSet& models,
                                           const MeasurementModel& meas_model,
                                           const ScoringParams& params);

struct EnumerationResult {
    std::vector<LocalHypothesis> hypotheses;
    std::int64_t pruned = 0;  // hypotheses dropped by the per-track cap
};

// All gated (target, s, r) tuples for each track plus one zero-cost
// dummy-target hypothesis per real measurement. Per track, only the `cap`
// lowest-cost hypotheses are kept; drops are counted, never silent.
EnumerationResult enumerate_hypotheses(const std::vector<Belief>& tracks,
                                       const std::vector<Scan>& scans,
                                       const ModelSet& models,
                                       const MeasurementModel& meas_model,
                                       const ScoringParams& params, int cap);

// log N(z; mean, cov) for a 2-vector.
double log_gaussian2(const Meas& z, const Meas& mean, const Eigen::Matrix2d& cov);

// Per-scan log-likelihood terms shared with the baseline trackers:
// missed detection log(1 - P_d) and the detection-to-clutter ratio
// log(P_d N(z; zhat, S) / (lambda_f / V)).
double log_miss_term(const ScoringParams& params);
double log_detection_term(const Meas& z, const Meas& zhat, const Eigen::Matrix2d& s,
                          const ScoringParams& params);

}  // namespace mtt
