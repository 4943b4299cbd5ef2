#pragma once

#include <deque>
#include <utility>
#include <vector>

#include "mtt/association.hpp"
#include "mtt/dynamics.hpp"
#include "mtt/hypothesis.hpp"
#include "mtt/tracker.hpp"

namespace mtt {

// Textbook Kalman predict + update; the independent oracle the randomized
// filter is checked against in its degenerate configuration.
std::pair<Vec, Mat> kf_step(const Vec& mean, const Mat& cov, const Mat& f, const Mat& q,
                            const Mat& h, const Mat& r, const Vec& z);

struct ModeBelief {
    Vec mean;
    Mat cov;
};

struct ImmBelief {
    std::vector<ModeBelief> modes;
    Vec mode_probs;
};

ImmBelief make_imm_belief(const Vec& mean, const Mat& cov, int n_modes);

// Moment-matched combination of the mode-conditioned estimates.
std::pair<Vec, Mat> imm_combine(const ImmBelief& b);

// One interaction / filtering / combination cycle with measurement z.
ImmBelief imm_step(const ImmBelief& b, const Mat& pij, const ModelSet& models,
                   const MeasurementModel& meas_model, const Meas& z);

// Per-mode prediction with mode probabilities left untouched (the missed
// detection path of the MHT baseline).
ImmBelief imm_predict_only(const ImmBelief& b, const ModelSet& models);

struct ImmTrack {
    int id = 0;
    ImmBelief belief;
    int miss_count = 0;
    double score = 0.0;
    TrackStatus status = TrackStatus::tentative;
};

// Baseline N-scan tracker: per-track mixture-predicted likelihoods collapse
// the model dimension, association solved exactly as a 0-1 program, tracks
// updated with the interacting multiple model filter.
class ImmMhtTracker {
public:
    ImmMhtTracker(TrackerConfig cfg, Mat pij);

    int add_track(const Vec& mean, const Mat& cov, TrackStatus status = TrackStatus::confirmed);
    StepDiagnostics step(const std::vector<Scan>& window_scans);

    const std::vector<ImmTrack>& tracks() const { return tracks_; }
    std::vector<Meas> confirmed_positions() const;

private:
    void manage_tracks(const std::vector<int>& live, const Mat& assoc, const Scan& first_scan,
                       const std::vector<std::pair<Meas, Eigen::Matrix2d>>& predictions);

    TrackerConfig cfg_;
    Mat pij_;
    std::vector<ImmTrack> tracks_;
    std::deque<std::pair<Scan, std::vector<int>>> init_buffer_;
    int next_id_ = 1;
};

}  // namespace mtt
