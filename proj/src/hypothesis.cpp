#include "mtt/hypothesis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mtt {

void ScoringParams::validate() const {
    if (!(p_d > 0.0 && p_d < 1.0)) throw std::invalid_argument("ScoringParams: p_d must be in (0,1)");
    if (!(lambda_f > 0.0)) throw std::invalid_argument("ScoringParams: lambda_f must be > 0");
    if (!(volume > 0.0)) throw std::invalid_argument("ScoringParams: volume must be > 0");
    if (!(gate_gamma > 0.0)) throw std::invalid_argument("ScoringParams: gate_gamma must be > 0");
}

double chi2_gate_threshold_2d(double exclusion_prob) {
    if (!(exclusion_prob > 0.0 && exclusion_prob < 1.0))
        throw std::invalid_argument("chi2_gate_threshold_2d: probability out of range");
    return -2.0 * std::log(exclusion_prob);
}

double log_gaussian2(const Meas& z, const Meas& mean, const Eigen::Matrix2d& cov) {
    const double det = cov.determinant();
    if (!(det > 0.0)) throw std::invalid_argument("log_gaussian2: covariance not positive definite");
    const Meas d = z - mean;
    const double maha = d.dot(cov.inverse() * d);
    return -std::log(2.0 * M_PI) - 0.5 * std::log(det) - 0.5 * maha;
}

std::vector<int> gate(const Meas& predicted_z, const Eigen::Matrix2d& s, const Scan& scan,
                      double gamma) {
    const double det = s.determinant();
    if (!(det > 0.0)) throw std::invalid_argument("gate: singular innovation covariance");
    const Eigen::Matrix2d sinv = s.inverse();
    std::vector<int> out;
    out.push_back(0);
    for (int r = 1; r <= scan.count(); ++r) {
        const Meas d = scan.at(r) - predicted_z;
        if (d.dot(sinv * d) <= gamma) out.push_back(r);
    }
    return out;
}

double log_miss_term(const ScoringParams& params) { return std::log(1.0 - params.p_d); }

double log_detection_term(const Meas& z, const Meas& zhat, const Eigen::Matrix2d& s,
                          const ScoringParams& params) {
    return std::log(params.p_d) + log_gaussian2(z, zhat, s) -
           std::log(params.lambda_f / params.volume);
}

namespace {

struct ChainState {
    StateVec x;
    Eigen::Matrix4d p;
};

ChainState advance(const ChainState& c, const MotionModel& m) {
    return ChainState{m.F * c.x, m.F * c.p * m.F.transpose() + m.Q};
}

// Per-scan log-likelihood term for an existing track.
double scan_term(const ChainState& c, int meas_index, const Scan& scan,
                 const MeasurementModel& mm, const ScoringParams& params) {
    if (meas_index == 0) return log_miss_term(params);
    const Meas zhat = mm.H * c.x;
    const Eigen::Matrix2d s = mm.H * c.p * mm.H.transpose() + mm.R;
    return log_detection_term(scan.at(meas_index), zhat, s, params);
}

}  // namespace

std::pair<double, double> score_hypothesis(const Belief& track_state,
                                           const std::vector<int>& model_seq,
                                           const std::vector<int>& meas_seq,
                                           const std::vector<Scan>& scans,
                                           const ModelSet& models,
                                           const MeasurementModel& meas_model,
                                           const ScoringParams& params) {
    params.validate();
    const std::size_t n = scans.size();
    if (model_seq.size() != n || meas_seq.size() != n)
        throw std::invalid_argument("score_hypothesis: sequence length mismatch");
    ChainState chain{StateVec(track_state.mean), Eigen::Matrix4d(track_state.cov)};
    double log_l = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const int s = model_seq[i];
        if (s < 1 || s > static_cast<int>(models.size()))
            throw std::invalid_argument("score_hypothesis: model index out of range");
        const int r = meas_seq[i];
        if (r < 0 || r > scans[i].count())
            throw std::invalid_argument("score_hypothesis: measurement index out of range");
        chain = advance(chain, models[static_cast<std::size_t>(s - 1)]);
        log_l += scan_term(chain, r, scans[i], meas_model, params);
    }
    return {log_l, -log_l};
}

EnumerationResult enumerate_hypotheses(const std::vector<Belief>& tracks,
                                       const std::vector<Scan>& scans,
                                       const ModelSet& models,
                                       const MeasurementModel& meas_model,
                                       const ScoringParams& params, int cap) {
    params.validate();
    if (scans.empty()) throw std::invalid_argument("enumerate_hypotheses: empty window");
    if (cap <= 0) throw std::invalid_argument("enumerate_hypotheses: cap must be > 0");
    if (models.empty()) throw std::invalid_argument("enumerate_hypotheses: empty model set");

    const int n_scans = static_cast<int>(scans.size());
    const int n_models = static_cast<int>(models.size());
    EnumerationResult result;

    std::vector<LocalHypothesis> track_hyps;
    std::vector<int> model_seq(static_cast<std::size_t>(n_scans));
    std::vector<int> meas_seq(static_cast<std::size_t>(n_scans));

    // Depth-first over scans: pick a model, advance the prediction chain,
    // gate, then branch over gated measurements. The chain never folds a
    // measurement back in, so gating depends only on the model prefix.
    struct Enumerator {
        const std::vector<Scan>& scans;
        const ModelSet& models;
        const MeasurementModel& mm;
        const ScoringParams& params;
        int n_scans;
        int n_models;
        std::vector<int>& model_seq;
        std::vector<int>& meas_seq;
        std::vector<LocalHypothesis>& out;
        int target = 0;

        void recurse(int depth, const ChainState& chain, double log_l) {
            if (depth == n_scans) {
                out.push_back(LocalHypothesis{target, model_seq, meas_seq, -log_l, log_l});
                return;
            }
            const Scan& scan = scans[static_cast<std::size_t>(depth)];
            for (int s = 1; s <= n_models; ++s) {
                model_seq[static_cast<std::size_t>(depth)] = s;
                const ChainState next = advance(chain, models[static_cast<std::size_t>(s - 1)]);
                const Meas zhat = mm.H * next.x;
                const Eigen::Matrix2d cov_z = mm.H * next.p * mm.H.transpose() + mm.R;
                for (int r : gate(zhat, cov_z, scan, params.gate_gamma)) {
                    meas_seq[static_cast<std::size_t>(depth)] = r;
                    recurse(depth + 1, next, log_l + scan_term(next, r, scan, mm, params));
                }
            }
        }
    };

    for (std::size_t t = 0; t < tracks.size(); ++t) {
        track_hyps.clear();
        Enumerator en{scans,     models,   meas_model, params,    n_scans,
                      n_models,  model_seq, meas_seq,  track_hyps};
        en.target = static_cast<int>(t) + 1;
        en.recurse(0, ChainState{StateVec(tracks[t].mean), Eigen::Matrix4d(tracks[t].cov)}, 0.0);
        if (static_cast<int>(track_hyps.size()) > cap) {
            std::stable_sort(track_hyps.begin(), track_hyps.end(),
                             [](const LocalHypothesis& a, const LocalHypothesis& b) {
                                 return a.cost < b.cost;
                             });
            const auto all_dummy = [](const LocalHypothesis& h) {
                return std::all_of(h.meas.begin(), h.meas.end(), [](int r) { return r == 0; });
            };
            // Keep an all-dummy fallback inside the cap so every target row
            // stays satisfiable no matter how measurements are contested.
            const auto best_dummy_it = std::find_if(track_hyps.begin(), track_hyps.end(), all_dummy);
            result.pruned += static_cast<std::int64_t>(track_hyps.size()) - cap;
            if (best_dummy_it != track_hyps.end() &&
                best_dummy_it - track_hyps.begin() >= cap) {
                track_hyps[static_cast<std::size_t>(cap - 1)] = *best_dummy_it;
            }
            track_hyps.resize(static_cast<std::size_t>(cap));
        }
        result.hypotheses.insert(result.hypotheses.end(), track_hyps.begin(), track_hyps.end());
    }

    // Dummy-target hypotheses absorb each real measurement as a false alarm
    // at zero cost (the track-born cost convention).
    for (int n = 0; n < n_scans; ++n) {
        for (int r = 1; r <= scans[static_cast<std::size_t>(n)].count(); ++r) {
            LocalHypothesis h;
            h.target = 0;
            h.models.assign(static_cast<std::size_t>(n_scans), 1);
            h.meas.assign(static_cast<std::size_t>(n_scans), 0);
            h.meas[static_cast<std::size_t>(n)] = r;
            h.cost = 0.0;
            h.log_likelihood = 0.0;
            result.hypotheses.push_back(std::move(h));
        }
    }
    return result;
}

}  // namespace mtt
