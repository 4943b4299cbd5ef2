#include "mtt/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mtt {

std::pair<Vec, Mat> kf_step(const Vec& mean, const Mat& cov, const Mat& f, const Mat& q,
                            const Mat& h, const Mat& r, const Vec& z) {
    const Vec x_pred = f * mean;
    const Mat p_pred = f * cov * f.transpose() + q;
    const Mat s = h * p_pred * h.transpose() + r;
    const double det = s.determinant();
    if (!(std::abs(det) > 0.0)) throw std::runtime_error("kf_step: singular innovation covariance");
    const Mat gain = p_pred * h.transpose() * s.inverse();
    const Vec x_upd = x_pred + gain * (z - h * x_pred);
    const Mat p_upd = symmetrize((Mat::Identity(cov.rows(), cov.cols()) - gain * h) * p_pred);
    return {x_upd, p_upd};
}

ImmBelief make_imm_belief(const Vec& mean, const Mat& cov, int n_modes) {
    if (n_modes < 1) throw std::invalid_argument("make_imm_belief: need at least one mode");
    ImmBelief b;
    b.modes.assign(static_cast<std::size_t>(n_modes), ModeBelief{mean, symmetrize(cov)});
    b.mode_probs = Vec::Constant(n_modes, 1.0 / n_modes);
    return b;
}

std::pair<Vec, Mat> imm_combine(const ImmBelief& b) {
    const Eigen::Index dim = b.modes.front().mean.size();
    Vec mean = Vec::Zero(dim);
    for (std::size_t j = 0; j < b.modes.size(); ++j)
        mean += b.mode_probs(static_cast<Eigen::Index>(j)) * b.modes[j].mean;
    Mat cov = Mat::Zero(dim, dim);
    for (std::size_t j = 0; j < b.modes.size(); ++j) {
        const Vec d = b.modes[j].mean - mean;
        cov += b.mode_probs(static_cast<Eigen::Index>(j)) *
               (b.modes[j].cov + d * d.transpose());
    }
    return {mean, symmetrize(cov)};
}

namespace {

void check_transition_matrix(const Mat& pij, int n_modes) {
    if (pij.rows() != n_modes || pij.cols() != n_modes)
        throw std::invalid_argument("transition matrix dimension mismatch");
    for (Eigen::Index i = 0; i < pij.rows(); ++i) {
        double row = 0.0;
        for (Eigen::Index j = 0; j < pij.cols(); ++j) {
            if (pij(i, j) < 0.0) throw std::invalid_argument("transition matrix entry < 0");
            row += pij(i, j);
        }
        if (std::abs(row - 1.0) > 1e-9)
            throw std::invalid_argument("transition matrix rows must sum to 1");
    }
}

// Interaction step: mixing probabilities and mixed initial conditions.
ImmBelief imm_mix(const ImmBelief& b, const Mat& pij) {
    const int n = static_cast<int>(b.modes.size());
    ImmBelief mixed;
    mixed.modes.resize(static_cast<std::size_t>(n));
    mixed.mode_probs = Vec::Zero(n);
    for (int j = 0; j < n; ++j) {
        double cj = 0.0;
        for (int i = 0; i < n; ++i) cj += pij(i, j) * b.mode_probs(i);
        mixed.mode_probs(j) = cj;
        if (cj < 1e-300) {
            // unreachable mode keeps its own state
            mixed.modes[static_cast<std::size_t>(j)] = b.modes[static_cast<std::size_t>(j)];
            continue;
        }
        const Eigen::Index dim = b.modes.front().mean.size();
        Vec mean = Vec::Zero(dim);
        for (int i = 0; i < n; ++i)
            mean += pij(i, j) * b.mode_probs(i) / cj * b.modes[static_cast<std::size_t>(i)].mean;
        Mat cov = Mat::Zero(dim, dim);
        for (int i = 0; i < n; ++i) {
            const double w = pij(i, j) * b.mode_probs(i) / cj;
            const Vec d = b.modes[static_cast<std::size_t>(i)].mean - mean;
            cov += w * (b.modes[static_cast<std::size_t>(i)].cov + d * d.transpose());
        }
        mixed.modes[static_cast<std::size_t>(j)] = ModeBelief{mean, symmetrize(cov)};
    }
    return mixed;
}

}  // namespace

ImmBelief imm_step(const ImmBelief& b, const Mat& pij, const ModelSet& models,
                   const MeasurementModel& meas_model, const Meas& z) {
    const int n = static_cast<int>(models.size());
    if (static_cast<int>(b.modes.size()) != n)
        throw std::invalid_argument("imm_step: mode/model count mismatch");
    check_transition_matrix(pij, n);

    ImmBelief mixed = imm_mix(b, pij);
    ImmBelief out;
    out.modes.resize(static_cast<std::size_t>(n));
    Vec log_w = Vec::Zero(n);
    for (int j = 0; j < n; ++j) {
        const MotionModel& m = models[static_cast<std::size_t>(j)];
        const ModeBelief& mb = mixed.modes[static_cast<std::size_t>(j)];
        const Vec x_pred = m.F * mb.mean;
        const Mat p_pred = m.F * mb.cov * m.F.transpose() + m.Q;
        const Eigen::Matrix2d s = meas_model.H * p_pred * meas_model.H.transpose() + meas_model.R;
        const Meas zhat = meas_model.H * x_pred;
        const Mat gain = p_pred * meas_model.H.transpose() * s.inverse();
        out.modes[static_cast<std::size_t>(j)].mean = x_pred + gain * (z - zhat);
        out.modes[static_cast<std::size_t>(j)].cov = symmetrize(
            (Mat::Identity(p_pred.rows(), p_pred.cols()) - gain * meas_model.H) * p_pred);
        const double prior = std::max(mixed.mode_probs(j), 0.0);
        log_w(j) = (prior > 0.0 ? std::log(prior) : -1e300) + log_gaussian2(z, zhat, s);
    }
    // log-sum-exp normalization guards against all-mode underflow
    const double m = log_w.maxCoeff();
    Vec w = (log_w.array() - m).exp();
    out.mode_probs = w / w.sum();
    return out;
}

ImmBelief imm_predict_only(const ImmBelief& b, const ModelSet& models) {
    if (b.modes.size() != models.size())
        throw std::invalid_argument("imm_predict_only: mode/model count mismatch");
    ImmBelief out = b;
    for (std::size_t j = 0; j < models.size(); ++j) {
        const MotionModel& m = models[j];
        out.modes[j].mean = m.F * b.modes[j].mean;
        out.modes[j].cov = symmetrize(m.F * b.modes[j].cov * m.F.transpose() + m.Q);
    }
    return out;
}

ImmMhtTracker::ImmMhtTracker(TrackerConfig cfg, Mat pij) : cfg_(std::move(cfg)), pij_(std::move(pij)) {
    cfg_.scoring.validate();
    check_transition_matrix(pij_, static_cast<int>(cfg_.models.size()));
}

int ImmMhtTracker::add_track(const Vec& mean, const Mat& cov, TrackStatus status) {
    ImmTrack tr;
    tr.id = next_id_++;
    tr.belief = make_imm_belief(mean, cov, static_cast<int>(cfg_.models.size()));
    tr.status = status;
    tracks_.push_back(std::move(tr));
    return tracks_.back().id;
}

StepDiagnostics ImmMhtTracker::step(const std::vector<Scan>& window_scans) {
    if (window_scans.empty()) throw std::invalid_argument("ImmMhtTracker::step: empty window");
    const Scan& first_scan = window_scans.front();
    std::vector<int> live;
    for (std::size_t i = 0; i < tracks_.size(); ++i)
        if (tracks_[i].status != TrackStatus::terminated) live.push_back(static_cast<int>(i));

    StepDiagnostics diag;
    const int t = static_cast<int>(live.size());
    Mat assoc = Mat::Zero(t, first_scan.count() + 1);
    std::vector<std::pair<Meas, Eigen::Matrix2d>> predictions;

    if (t > 0) {
        // Mixture-predicted chain per track: the model dimension collapses to
        // a single effective prediction per scan of the window.
        const int n_modes = static_cast<int>(cfg_.models.size());
        AssociationProblem problem;
        problem.num_targets = t;
        problem.window = static_cast<int>(window_scans.size());
        for (const Scan& s : window_scans) problem.meas_counts.push_back(s.count());

        for (int a = 0; a < t; ++a) {
            const ImmTrack& tr = tracks_[static_cast<std::size_t>(live[a])];
            Vec mu = tr.belief.mode_probs;

            // Effective one-step prediction: transition the mode probabilities,
            // predict each mode, moment-match.
            mu = pij_.transpose() * mu;
            ImmBelief pred = imm_predict_only(ImmBelief{tr.belief.modes, mu}, cfg_.models);
            pred.mode_probs = mu;
            auto [x_eff, p_eff] = imm_combine(pred);
            predictions.emplace_back(
                cfg_.meas_model.H * x_eff,
                Eigen::Matrix2d(cfg_.meas_model.H * p_eff * cfg_.meas_model.H.transpose() +
                                cfg_.meas_model.R));

            struct Node {
                std::vector<int> meas;
                double log_l;
            };
            std::vector<Node> frontier{{{}, 0.0}};
            Vec x_chain = x_eff;
            Mat p_chain = p_eff;
            for (std::size_t n = 0; n < window_scans.size(); ++n) {
                if (n > 0) {
                    mu = pij_.transpose() * mu;
                    Mat f_eff = Mat::Zero(4, 4);
                    Mat q_eff = Mat::Zero(4, 4);
                    for (int j = 0; j < n_modes; ++j) {
                        f_eff += mu(j) * cfg_.models[static_cast<std::size_t>(j)].F;
                        q_eff += mu(j) * cfg_.models[static_cast<std::size_t>(j)].Q;
                    }
                    x_chain = f_eff * x_chain;
                    p_chain = symmetrize(f_eff * p_chain * f_eff.transpose() + q_eff);
                }
                const Meas zhat = cfg_.meas_model.H * x_chain;
                const Eigen::Matrix2d s =
                    cfg_.meas_model.H * p_chain * cfg_.meas_model.H.transpose() + cfg_.meas_model.R;
                const Scan& scan = window_scans[n];
                const std::vector<int> gated = gate(zhat, s, scan, cfg_.scoring.gate_gamma);
                std::vector<Node> next;
                for (const Node& node : frontier) {
                    for (int r : gated) {
                        Node nn = node;
                        nn.meas.push_back(r);
                        nn.log_l += r == 0 ? log_miss_term(cfg_.scoring)
                                           : log_detection_term(scan.at(r), zhat, s, cfg_.scoring);
                        next.push_back(std::move(nn));
                    }
                }
                frontier = std::move(next);
            }
            if (static_cast<int>(frontier.size()) > cfg_.hypothesis_cap) {
                std::stable_sort(frontier.begin(), frontier.end(),
                                 [](const Node& x, const Node& y) { return x.log_l > y.log_l; });
                const auto all_dummy = [](const Node& nd) {
                    return std::all_of(nd.meas.begin(), nd.meas.end(),
                                       [](int r) { return r == 0; });
                };
                const auto dummy_it = std::find_if(frontier.begin(), frontier.end(), all_dummy);
                if (dummy_it != frontier.end() &&
                    dummy_it - frontier.begin() >= cfg_.hypothesis_cap)
                    frontier[static_cast<std::size_t>(cfg_.hypothesis_cap - 1)] = *dummy_it;
                frontier.resize(static_cast<std::size_t>(cfg_.hypothesis_cap));
            }
            for (Node& node : frontier) {
                LocalHypothesis h;
                h.target = a + 1;
                h.models.assign(window_scans.size(), 1);
                h.meas = std::move(node.meas);
                h.log_likelihood = node.log_l;
                h.cost = -node.log_l;
                problem.hypotheses.push_back(std::move(h));
            }
        }
        for (std::size_t n = 0; n < window_scans.size(); ++n) {
            for (int r = 1; r <= window_scans[n].count(); ++r) {
                LocalHypothesis h;
                h.target = 0;
                h.models.assign(window_scans.size(), 1);
                h.meas.assign(window_scans.size(), 0);
                h.meas[n] = r;
                problem.hypotheses.push_back(std::move(h));
            }
        }

        const AssociationLp lp = build_lp(problem);
        const AssociationSolution sol = solve_ip(lp);
        const Marginals marg = marginals(problem, sol);
        assoc = marg.assoc;

        diag.objective = sol.objective;
        diag.is_integral = sol.is_integral;
        diag.hypothesis_count = static_cast<int>(problem.hypotheses.size());

        // Commit the first scan: IMM update with the assigned measurement or
        // prediction-only with unchanged mode probabilities.
        for (int a = 0; a < t; ++a) {
            ImmTrack& tr = tracks_[static_cast<std::size_t>(live[a])];
            int assigned = 0;
            for (int r = 1; r <= first_scan.count(); ++r) {
                if (assoc(a, r) > 0.5) {
                    assigned = r;
                    break;
                }
            }
            if (assigned > 0) {
                tr.belief = imm_step(tr.belief, pij_, cfg_.models, cfg_.meas_model,
                                     first_scan.at(assigned));
            } else {
                tr.belief = imm_predict_only(tr.belief, cfg_.models);
            }
        }
    }

    manage_tracks(live, assoc, first_scan, predictions);
    return diag;
}

void ImmMhtTracker::manage_tracks(const std::vector<int>& live, const Mat& assoc,
                                  const Scan& first_scan,
                                  const std::vector<std::pair<Meas, Eigen::Matrix2d>>& predictions) {
    for (std::size_t a = 0; a < live.size(); ++a) {
        ImmTrack& tr = tracks_[static_cast<std::size_t>(live[a])];
        const double dummy_p = assoc(static_cast<Eigen::Index>(a), 0);
        if (dummy_p > cfg_.miss_threshold) {
            ++tr.miss_count;
            tr.score += log_miss_term(cfg_.scoring);
        } else {
            tr.miss_count = 0;
            int best_r = 0;
            double best_p = 0.0;
            for (int r = 1; r < assoc.cols(); ++r) {
                if (assoc(static_cast<Eigen::Index>(a), r) > best_p) {
                    best_p = assoc(static_cast<Eigen::Index>(a), r);
                    best_r = r;
                }
            }
            if (best_r > 0 && a < predictions.size()) {
                tr.score += log_detection_term(first_scan.at(best_r), predictions[a].first,
                                               predictions[a].second, cfg_.scoring);
            }
        }
        if (tr.status == TrackStatus::tentative) {
            if (tr.miss_count >= 1) {
                tr.status = TrackStatus::terminated;
            } else if (tr.score >= cfg_.confirm_score) {
                tr.status = TrackStatus::confirmed;
            }
        } else if (tr.status == TrackStatus::confirmed && tr.miss_count > cfg_.n_loss) {
            tr.status = TrackStatus::terminated;
        }
    }

    if (!cfg_.enable_birth) return;

    Scan unclaimed;
    unclaimed.time_index = first_scan.time_index;
    std::vector<int> original;
    for (int r = 1; r <= first_scan.count(); ++r) {
        double claimed = 0.0;
        for (Eigen::Index tau = 0; tau < assoc.rows(); ++tau) claimed += assoc(tau, r);
        if (claimed < cfg_.claim_threshold) {
            unclaimed.measurements.push_back(first_scan.at(r));
            original.push_back(r);
        }
    }
    init_buffer_.emplace_back(std::move(unclaimed), std::move(original));
    while (init_buffer_.size() > 2) init_buffer_.pop_front();
    if (init_buffer_.size() < 2) return;

    const Scan& s0 = init_buffer_[0].first;
    const Scan& s1 = init_buffer_[1].first;
    if (s0.count() == 0 || s1.count() == 0) return;

    const double step_dt = cfg_.init.dt * std::max(1, s1.time_index - s0.time_index);
    std::vector<InitCandidate> cands =
        track_init_lp({s0, s1}, cfg_.meas_model, cfg_.scoring, cfg_.init);

    std::vector<const InitCandidate*> accepted;
    for (const auto& c : cands) {
        int real = 0;
        for (int r : c.meas)
            if (r > 0) ++real;
        if (real >= 2 && c.probability >= cfg_.confirm_threshold) accepted.push_back(&c);
    }
    std::sort(accepted.begin(), accepted.end(),
              [](const InitCandidate* a, const InitCandidate* b) { return a->cost < b->cost; });
    if (static_cast<int>(accepted.size()) > cfg_.max_new_tracks)
        accepted.resize(static_cast<std::size_t>(cfg_.max_new_tracks));

    std::vector<char> used0(static_cast<std::size_t>(s0.count()) + 1, 0);
    std::vector<char> used1(static_cast<std::size_t>(s1.count()) + 1, 0);
    for (const InitCandidate* c : accepted) {
        const int r0 = c->meas[0];
        const int r1 = c->meas[1];
        if (used0[static_cast<std::size_t>(r0)] || used1[static_cast<std::size_t>(r1)]) continue;
        used0[static_cast<std::size_t>(r0)] = 1;
        used1[static_cast<std::size_t>(r1)] = 1;
        const Meas z0 = s0.at(r0);
        const Meas z1 = s1.at(r1);
        Vec mean(4);
        mean << z1(0), (z1(0) - z0(0)) / step_dt, z1(1), (z1(1) - z0(1)) / step_dt;
        const double var_p = cfg_.meas_model.R(0, 0);
        const double var_v = 2.0 * var_p / (step_dt * step_dt);
        Mat cov = Mat::Zero(4, 4);
        cov.diagonal() << var_p, var_v, var_p, var_v;
        add_track(mean, cov, TrackStatus::tentative);
    }

    auto& newer = init_buffer_[1];
    Scan filtered;
    filtered.time_index = newer.first.time_index;
    std::vector<int> filtered_orig;
    for (int r = 1; r <= newer.first.count(); ++r) {
        if (!used1[static_cast<std::size_t>(r)]) {
            filtered.measurements.push_back(newer.first.at(r));
            filtered_orig.push_back(newer.second[static_cast<std::size_t>(r - 1)]);
        }
    }
    newer.first = std::move(filtered);
    newer.second = std::move(filtered_orig);
}

std::vector<Meas> ImmMhtTracker::confirmed_positions() const {
    std::vector<Meas> out;
    for (const ImmTrack& tr : tracks_) {
        if (tr.status != TrackStatus::confirmed) continue;
        const auto [mean, cov] = imm_combine(tr.belief);
        out.emplace_back(mean(0), mean(2));
    }
    return out;
}

}  // namespace mtt
