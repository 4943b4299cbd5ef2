#include "mtt/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mtt {

namespace {

// Clamp tiny solver noise and renormalize a probability row.
std::vector<double> clean_probs(const std::vector<double>& raw, const char* what) {
    double sum = 0.0;
    std::vector<double> out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i] < -1e-8)
            throw std::runtime_error(std::string(what) + ": negative probability mass");
        out[i] = std::max(raw[i], 0.0);
        sum += out[i];
    }
    if (std::abs(sum - 1.0) > 1e-6)
        throw std::runtime_error(std::string(what) + ": probabilities do not sum to 1");
    for (auto& p : out) p /= sum;
    return out;
}

}  // namespace

StackedSystem build_stacked_system(const std::vector<Track>& tracks, const Marginals& marginals,
                                   const ModelSet& models, const MeasurementModel& meas_model,
                                   const Scan& scan) {
    const int t = static_cast<int>(tracks.size());
    if (marginals.assoc.rows() != t || marginals.model.rows() != t)
        throw std::invalid_argument("build_stacked_system: marginal rows mismatch");
    const int n_models = static_cast<int>(models.size());
    if (marginals.model.cols() > n_models)
        throw std::invalid_argument("build_stacked_system: model marginal width mismatch");
    const int dim = 4 * t;

    StackedSystem sys;
    sys.f_per_target.reserve(static_cast<std::size_t>(t));
    for (int tau = 0; tau < t; ++tau) {
        std::vector<double> raw(static_cast<std::size_t>(n_models), 0.0);
        for (int s = 0; s < marginals.model.cols(); ++s) raw[static_cast<std::size_t>(s)] =
            marginals.model(tau, s);
        const auto probs = clean_probs(raw, "model marginals");
        std::vector<MatrixRealization> reals;
        for (int s = 0; s < n_models; ++s) {
            reals.push_back({models[static_cast<std::size_t>(s)].F,
                             models[static_cast<std::size_t>(s)].Q,
                             probs[static_cast<std::size_t>(s)]});
        }
        sys.f_per_target.emplace_back(std::move(reals));
    }

    const int r1 = scan.count();
    if (marginals.assoc.cols() != r1 + 1)
        throw std::invalid_argument("build_stacked_system: association marginal width mismatch");
    sys.h_per_meas.reserve(static_cast<std::size_t>(r1));
    for (int r = 1; r <= r1; ++r) {
        double mass = 0.0;
        for (int tau = 0; tau < t; ++tau) {
            if (marginals.assoc(tau, r) < -1e-8)
                throw std::runtime_error("build_stacked_system: negative association mass");
            mass += std::max(marginals.assoc(tau, r), 0.0);
        }
        const double residual = 1.0 - mass;
        if (residual < -1e-8)
            throw std::runtime_error("build_stacked_system: inconsistent marginals (mass > 1)");
        std::vector<MatrixRealization> reals;
        for (int tau = 0; tau < t; ++tau) {
            const double p = std::max(marginals.assoc(tau, r), 0.0);
            if (p <= 0.0) continue;
            Mat h = Mat::Zero(2, dim);
            h.block(0, 4 * tau, 2, 4) = meas_model.H;
            reals.push_back({std::move(h), meas_model.R, p});
        }
        // Zero row: the measurement is clutter with the leftover probability.
        reals.push_back({Mat::Zero(2, dim), meas_model.R, std::max(residual, 0.0)});
        double total = 0.0;
        for (const auto& x : reals) total += x.probability;
        for (auto& x : reals) x.probability /= total;
        sys.h_per_meas.emplace_back(std::move(reals));
    }

    sys.stacked_r = Mat::Zero(2 * r1, 2 * r1);
    for (int r = 0; r < r1; ++r) sys.stacked_r.block(2 * r, 2 * r, 2, 2) = meas_model.R;
    return sys;
}

FastPathPartition fast_path_partition(const Marginals& marginals, double tol) {
    FastPathPartition part;
    const int t = static_cast<int>(marginals.assoc.rows());
    const int r1 = static_cast<int>(marginals.assoc.cols()) - 1;
    std::vector<int> owner(static_cast<std::size_t>(r1) + 1, -1);
    for (int r = 1; r <= r1; ++r) {
        double mass = 0.0;
        int hot = -1;
        int positives = 0;
        for (int tau = 0; tau < t; ++tau) {
            const double p = marginals.assoc(tau, r);
            mass += p;
            if (p > tol) {
                ++positives;
                if (p >= 1.0 - tol) hot = tau;
            }
        }
        if (mass <= tol) continue;  // pure clutter, not part of the update
        if (positives == 1 && hot >= 0) {
            owner[static_cast<std::size_t>(r)] = hot;
            part.exclusive.push_back(r);
        } else {
            part.shared.push_back(r);
        }
    }
    // Two one-hot measurements on the same target cannot be decoupled.
    for (std::size_t i = 0; i < part.exclusive.size();) {
        const int r = part.exclusive[i];
        bool dup = false;
        for (std::size_t j = 0; j < part.exclusive.size(); ++j) {
            if (j != i && owner[static_cast<std::size_t>(part.exclusive[j])] ==
                              owner[static_cast<std::size_t>(r)]) {
                dup = true;
                break;
            }
        }
        if (dup) {
            part.shared.push_back(r);
            part.exclusive.erase(part.exclusive.begin() + static_cast<std::ptrdiff_t>(i));
        } else {
            ++i;
        }
    }
    std::sort(part.shared.begin(), part.shared.end());
    part.applicable = !part.exclusive.empty();
    return part;
}

Tracker::Tracker(TrackerConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.scoring.validate();
    if (cfg_.window < 1) throw std::invalid_argument("TrackerConfig: window must be >= 1");
    if (cfg_.models.empty()) throw std::invalid_argument("TrackerConfig: empty model set");
    stacked_.x = Vec::Zero(0);
    stacked_.p = Mat::Zero(0, 0);
    stacked_.exx = Mat::Zero(0, 0);
}

int Tracker::add_track(const Belief& belief, TrackStatus status) {
    if (belief.mean.size() != 4) throw std::invalid_argument("add_track: state must be 4-dim");
    Track tr;
    tr.id = next_id_++;
    tr.belief = belief;
    tr.status = status;
    tracks_.push_back(tr);
    append_block(belief);
    return tr.id;
}

std::vector<int> Tracker::live_indices() const {
    std::vector<int> live;
    for (std::size_t i = 0; i < tracks_.size(); ++i)
        if (tracks_[i].status != TrackStatus::terminated) live.push_back(static_cast<int>(i));
    return live;
}

void Tracker::append_block(const Belief& b) {
    const Eigen::Index n = stacked_.x.size();
    Vec x = Vec::Zero(n + 4);
    x.head(n) = stacked_.x;
    x.tail(4) = b.mean;
    Mat p = Mat::Zero(n + 4, n + 4);
    p.topLeftCorner(n, n) = stacked_.p;
    p.bottomRightCorner(4, 4) = b.cov;
    Mat exx = Mat::Zero(n + 4, n + 4);
    exx.topLeftCorner(n, n) = stacked_.exx;
    exx.bottomRightCorner(4, 4) = b.second_moment;
    // A new track is independent of the existing ones, so the cross second
    // moment is the outer product of the means, not zero.
    exx.bottomLeftCorner(4, n) = b.mean * stacked_.x.transpose();
    exx.topRightCorner(n, 4) = stacked_.x * b.mean.transpose();
    stacked_.x = std::move(x);
    stacked_.p = std::move(p);
    stacked_.exx = std::move(exx);
}

void Tracker::rebuild_stacked(const std::vector<int>& keep) {
    const Eigen::Index n = 4 * static_cast<Eigen::Index>(keep.size());
    Vec x = Vec::Zero(n);
    Mat p = Mat::Zero(n, n);
    Mat exx = Mat::Zero(n, n);
    for (std::size_t a = 0; a < keep.size(); ++a) {
        x.segment(4 * static_cast<Eigen::Index>(a), 4) = stacked_.x.segment(4 * keep[a], 4);
        for (std::size_t b = 0; b < keep.size(); ++b) {
            p.block(4 * static_cast<Eigen::Index>(a), 4 * static_cast<Eigen::Index>(b), 4, 4) =
                stacked_.p.block(4 * keep[a], 4 * keep[b], 4, 4);
            exx.block(4 * static_cast<Eigen::Index>(a), 4 * static_cast<Eigen::Index>(b), 4, 4) =
                stacked_.exx.block(4 * keep[a], 4 * keep[b], 4, 4);
        }
    }
    stacked_.x = std::move(x);
    stacked_.p = std::move(p);
    stacked_.exx = std::move(exx);
}

void Tracker::sync_track_views(const std::vector<int>& live) {
    for (std::size_t a = 0; a < live.size(); ++a) {
        Track& tr = tracks_[static_cast<std::size_t>(live[a])];
        tr.belief.mean = stacked_.x.segment(4 * static_cast<Eigen::Index>(a), 4);
        tr.belief.cov =
            stacked_.p.block(4 * static_cast<Eigen::Index>(a), 4 * static_cast<Eigen::Index>(a), 4, 4);
        tr.belief.second_moment =
            stacked_.exx.block(4 * static_cast<Eigen::Index>(a), 4 * static_cast<Eigen::Index>(a), 4, 4);
    }
}

StepDiagnostics Tracker::step(const std::vector<Scan>& window_scans) {
    if (window_scans.empty()) throw std::invalid_argument("Tracker::step: empty window");
    const Scan& first_scan = window_scans.front();
    const std::vector<int> live = live_indices();
    StepDiagnostics diag;

    Marginals marg;
    marg.assoc = Mat::Zero(static_cast<Eigen::Index>(live.size()), first_scan.count() + 1);
    marg.model = Mat::Zero(static_cast<Eigen::Index>(live.size()),
                           static_cast<Eigen::Index>(cfg_.models.size()));

    if (!live.empty()) {
        std::vector<Belief> beliefs;
        beliefs.reserve(live.size());
        for (int i : live) beliefs.push_back(tracks_[static_cast<std::size_t>(i)].belief);

        EnumerationResult en = enumerate_hypotheses(beliefs, window_scans, cfg_.models,
                                                    cfg_.meas_model, cfg_.scoring,
                                                    cfg_.hypothesis_cap);
        AssociationProblem problem;
        problem.hypotheses = std::move(en.hypotheses);
        problem.num_targets = static_cast<int>(live.size());
        problem.window = static_cast<int>(window_scans.size());
        for (const Scan& s : window_scans) problem.meas_counts.push_back(s.count());

        const AssociationLp lp = build_lp(problem);
        if (cfg_.lp_dump) dump_lp(lp, *cfg_.lp_dump);
        const AssociationSolution sol = solve_lp(lp);
        Marginals m = marginals(problem, sol);
        marg.assoc = m.assoc;
        marg.model.leftCols(m.model.cols()) = m.model;

        diag.objective = sol.objective;
        diag.is_integral = sol.is_integral;
        diag.hypothesis_count = static_cast<int>(problem.hypotheses.size());
        diag.pruned_hypotheses = en.pruned;

        // --- stacked time update -------------------------------------------------
        std::vector<Track> live_tracks;
        for (int i : live) live_tracks.push_back(tracks_[static_cast<std::size_t>(i)]);
        const StackedSystem sys =
            build_stacked_system(live_tracks, marg, cfg_.models, cfg_.meas_model, first_scan);

        const Eigen::Index dim = stacked_.x.size();
        Mat f_bar = Mat::Zero(dim, dim);
        Mat q_eff = Mat::Zero(dim, dim);
        for (std::size_t a = 0; a < live.size(); ++a) {
            const Eigen::Index o = 4 * static_cast<Eigen::Index>(a);
            f_bar.block(o, o, 4, 4) = mean_matrix(sys.f_per_target[a]);
            q_eff.block(o, o, 4, 4) =
                effective_process_cov(sys.f_per_target[a], stacked_.exx.block(o, o, 4, 4));
        }
        Vec x_pred = f_bar * stacked_.x;
        Mat p_pred = symmetrize(f_bar * stacked_.p * f_bar.transpose() + q_eff);
        Mat exx_pred = symmetrize(f_bar * stacked_.exx * f_bar.transpose() + q_eff);

        // Per-track predicted measurement and innovation covariance, kept
        // for the track-score update in manage_tracks.
        std::vector<std::pair<Meas, Eigen::Matrix2d>> predictions;
        for (std::size_t a = 0; a < live.size(); ++a) {
            const Eigen::Index o = 4 * static_cast<Eigen::Index>(a);
            const Meas zhat = cfg_.meas_model.H * x_pred.segment(o, 4);
            const Eigen::Matrix2d s_trk = cfg_.meas_model.H * p_pred.block(o, o, 4, 4) *
                                              cfg_.meas_model.H.transpose() +
                                          cfg_.meas_model.R;
            predictions.emplace_back(zhat, s_trk);
        }

        // --- stacked measurement update ------------------------------------------
        std::vector<int> active;  // 1-based measurement indices with mass
        for (int r = 1; r <= first_scan.count(); ++r) {
            double mass = 0.0;
            for (Eigen::Index tau = 0; tau < marg.assoc.rows(); ++tau)
                mass += marg.assoc(tau, r);
            if (mass > 1e-12) active.push_back(r);
        }

        const FastPathPartition part = fast_path_partition(marg);
        diag.shared_measurements = static_cast<int>(part.shared.size());

        if (!active.empty()) {
            const Eigen::Index zrows = 2 * static_cast<Eigen::Index>(active.size());
            Mat h_bar = Mat::Zero(zrows, dim);
            Mat r_eff = Mat::Zero(zrows, zrows);
            Vec z = Vec::Zero(zrows);
            for (std::size_t a = 0; a < active.size(); ++a) {
                const auto& dist = sys.h_per_meas[static_cast<std::size_t>(active[a] - 1)];
                const Eigen::Index o = 2 * static_cast<Eigen::Index>(a);
                h_bar.block(o, 0, 2, dim) = mean_matrix(dist);
                r_eff.block(o, o, 2, 2) = effective_meas_cov(dist, exx_pred);
                z.segment(o, 2) = first_scan.at(active[a]);
            }
            const Mat s = symmetrize(h_bar * p_pred * h_bar.transpose() + r_eff);

            Mat s_inv;
            bool used_blockwise = false;
            if (cfg_.use_fast_path && part.applicable) {
                // Verify the numeric block structure before trusting it.
                double off = 0.0;
                std::vector<char> is_excl(active.size(), 0);
                for (std::size_t a = 0; a < active.size(); ++a)
                    is_excl[a] = std::count(part.exclusive.begin(), part.exclusive.end(),
                                            active[a]) > 0;
                for (std::size_t a = 0; a < active.size(); ++a) {
                    if (!is_excl[a]) continue;
                    for (std::size_t b = 0; b < active.size(); ++b) {
                        if (a == b) continue;
                        off = std::max(off, s.block(2 * static_cast<Eigen::Index>(a),
                                                    2 * static_cast<Eigen::Index>(b), 2, 2)
                                                .cwiseAbs()
                                                .maxCoeff());
                    }
                }
                if (off < 1e-9 * (1.0 + s.cwiseAbs().maxCoeff())) {
                    s_inv = Mat::Zero(zrows, zrows);
                    std::vector<Eigen::Index> rest;
                    for (std::size_t a = 0; a < active.size(); ++a) {
                        const Eigen::Index o = 2 * static_cast<Eigen::Index>(a);
                        if (is_excl[a]) {
                            s_inv.block(o, o, 2, 2) =
                                s.block(o, o, 2, 2).inverse();
                        } else {
                            rest.push_back(o);
                        }
                    }
                    if (!rest.empty()) {
                        Mat sb(2 * static_cast<Eigen::Index>(rest.size()),
                               2 * static_cast<Eigen::Index>(rest.size()));
                        for (std::size_t a = 0; a < rest.size(); ++a)
                            for (std::size_t b = 0; b < rest.size(); ++b)
                                sb.block(2 * static_cast<Eigen::Index>(a),
                                         2 * static_cast<Eigen::Index>(b), 2, 2) =
                                    s.block(rest[a], rest[b], 2, 2);
                        const Mat sb_inv = sym_pseudo_inverse(sb);
                        for (std::size_t a = 0; a < rest.size(); ++a)
                            for (std::size_t b = 0; b < rest.size(); ++b)
                                s_inv.block(rest[a], rest[b], 2, 2) =
                                    sb_inv.block(2 * static_cast<Eigen::Index>(a),
                                                 2 * static_cast<Eigen::Index>(b), 2, 2);
                    }
                    used_blockwise = true;
                }
            }
            if (!used_blockwise) s_inv = sym_pseudo_inverse(s);

            const Mat gain = p_pred * h_bar.transpose() * s_inv;
            x_pred += gain * (z - h_bar * x_pred);
            p_pred = symmetrize((Mat::Identity(dim, dim) - gain * h_bar) * p_pred);
        }

        stacked_.x = std::move(x_pred);
        stacked_.p = std::move(p_pred);
        stacked_.exx = std::move(exx_pred);
        sync_track_views(live);
        manage_tracks(live, marg, first_scan, predictions);
    } else {
        manage_tracks(live, marg, first_scan, {});
    }
    return diag;
}

void Tracker::manage_tracks(const std::vector<int>& live, const Marginals& marg,
                            const Scan& first_scan,
                            const std::vector<std::pair<Meas, Eigen::Matrix2d>>& predictions) {
    // Miss counting, track-score update, and promotion from the committed
    // first-scan marginals.
    std::vector<int> keep;  // positions in the live order that survive
    for (std::size_t a = 0; a < live.size(); ++a) {
        Track& tr = tracks_[static_cast<std::size_t>(live[a])];
        const double dummy_p = marg.assoc(static_cast<Eigen::Index>(a), 0);
        if (dummy_p > cfg_.miss_threshold) {
            ++tr.miss_count;
            tr.score += log_miss_term(cfg_.scoring);
        } else {
            tr.miss_count = 0;
            int best_r = 0;
            double best_p = 0.0;
            for (int r = 1; r < marg.assoc.cols(); ++r) {
                if (marg.assoc(static_cast<Eigen::Index>(a), r) > best_p) {
                    best_p = marg.assoc(static_cast<Eigen::Index>(a), r);
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
        if (tr.status != TrackStatus::terminated) keep.push_back(static_cast<int>(a));
    }
    if (keep.size() != live.size()) rebuild_stacked(keep);

    if (!cfg_.enable_birth) return;

    // Buffer unclaimed measurements of the committed scan for pair formation.
    Scan unclaimed;
    unclaimed.time_index = first_scan.time_index;
    std::vector<int> original;
    for (int r = 1; r <= first_scan.count(); ++r) {
        double claimed = 0.0;
        for (Eigen::Index tau = 0; tau < marg.assoc.rows(); ++tau)
            claimed += marg.assoc(tau, r);
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
    if (s0.count() == 0 && s1.count() == 0) return;

    InitParams init = cfg_.init;
    const double step_dt = init.dt * std::max(1, s1.time_index - s0.time_index);
    std::vector<InitCandidate> cands =
        track_init_lp({s0, s1}, cfg_.meas_model, cfg_.scoring, init);

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

        // Two-point initialization: latest position, difference-quotient
        // velocity, diag(sigma^2, 2 sigma^2 / dt^2) covariance blocks.
        Vec mean(4);
        mean << z1(0), (z1(0) - z0(0)) / step_dt, z1(1), (z1(1) - z0(1)) / step_dt;
        const double var_p = cfg_.meas_model.R(0, 0);
        const double var_v = 2.0 * var_p / (step_dt * step_dt);
        Mat cov = Mat::Zero(4, 4);
        cov.diagonal() << var_p, var_v, var_p, var_v;
        add_track(make_belief(mean, cov), TrackStatus::tentative);
    }

    // Spent measurements must not seed another pair next step.
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

std::vector<Meas> Tracker::confirmed_positions() const {
    std::vector<Meas> out;
    for (const Track& tr : tracks_) {
        if (tr.status != TrackStatus::confirmed) continue;
        out.emplace_back(tr.belief.mean(0), tr.belief.mean(2));
    }
    return out;
}

}  // namespace mtt
