#pragma once

#include <deque>
#include <iosfwd>
#include <vector>

#include "mtt/association.hpp"
#include "mtt/dynamics.hpp"
#include "mtt/hypothesis.hpp"
#include "mtt/rcmkf.hpp"

namespace mtt {

enum class TrackStatus { tentative, confirmed, terminated };

struct Track {
    int id = 0;
    Belief belief;  // 4-dim block view of the stacked estimate
    int miss_count = 0;
    double score = 0.0;  // cumulative log-likelihood ratio since birth
    TrackStatus status = TrackStatus::tentative;
};

// Stacked estimate over all live targets: mean, covariance (cross-target
// correlation retained), and unconditional second moment.
struct StackedBelief {
    Vec x;
    Mat p;
    Mat exx;
};

// Randomized stacked system for one update: per-target transition
// distributions from the model marginals and per-measurement row
// distributions from the association marginals (zero row = clutter).
struct StackedSystem {
    std::vector<DiscreteMatrixDistribution> f_per_target;
    std::vector<DiscreteMatrixDistribution> h_per_meas;
    Mat stacked_r;  // block diagonal measurement noise for all rows
};

StackedSystem build_stacked_system(const std::vector<Track>& tracks, const Marginals& marginals,
                                   const ModelSet& models, const MeasurementModel& meas_model,
                                   const Scan& scan);

// Measurements split into one-hot non-shared associations (exclusive, each
// invertible as its own block) and the rest (shared).
struct FastPathPartition {
    std::vector<int> exclusive;  // measurement indices, 1-based
    std::vector<int> shared;
    bool applicable = false;     // true when the exclusive set is nonempty
};

FastPathPartition fast_path_partition(const Marginals& marginals, double tol = 1e-9);

struct TrackerConfig {
    ModelSet models;
    MeasurementModel meas_model;
    ScoringParams scoring;
    int window = 2;
    int hypothesis_cap = 200;
    double miss_threshold = 0.5;  // dummy probability counting as a miss
    int n_loss = 3;               // confirmed-track termination threshold
    double confirm_score = 4.0;   // track score promoting a tentative
    double claim_threshold = 0.5; // marks a measurement as assigned
    double confirm_threshold = 0.8;  // init tuple acceptance probability
    bool enable_birth = true;
    int max_new_tracks = 8;
    InitParams init;
    bool use_fast_path = true;
    std::ostream* lp_dump = nullptr;
};

struct StepDiagnostics {
    double objective = 0.0;
    bool is_integral = true;
    int hypothesis_count = 0;
    int shared_measurements = 0;
    std::int64_t pruned_hypotheses = 0;
};

// Sliding-window tracker: enumerate local hypotheses over the window, solve
// the relaxed association problem, form the stacked randomized system from
// the first-scan marginals, update with the generalized filter, then manage
// track life cycle. Each call advances one scan.
class Tracker {
public:
    explicit Tracker(TrackerConfig cfg);

    int add_track(const Belief& belief, TrackStatus status = TrackStatus::confirmed);

    StepDiagnostics step(const std::vector<Scan>& window_scans);

    const std::vector<Track>& tracks() const { return tracks_; }
    const StackedBelief& stacked() const { return stacked_; }
    const TrackerConfig& config() const { return cfg_; }

    // Position estimates of confirmed tracks (for evaluation).
    std::vector<Meas> confirmed_positions() const;

private:
    std::vector<int> live_indices() const;
    void rebuild_stacked(const std::vector<int>& keep);
    void append_block(const Belief& b);
    void sync_track_views(const std::vector<int>& live);
    void manage_tracks(const std::vector<int>& live, const Marginals& marg,
                       const Scan& first_scan,
                       const std::vector<std::pair<Meas, Eigen::Matrix2d>>& predictions);

    TrackerConfig cfg_;
    std::vector<Track> tracks_;
    StackedBelief stacked_;
    std::deque<std::pair<Scan, std::vector<int>>> init_buffer_;  // scan + original indices
    int next_id_ = 1;
};

}  // namespace mtt
