#include "mtt/association.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "mtt/dynamics.hpp"

namespace mtt {

namespace {

constexpr double kIntegralTol = 1e-9;

int measurement_row(const AssociationProblem& p, int scan, int r) {
    int row = p.num_targets;
    for (int n = 0; n < scan; ++n) row += p.meas_counts[static_cast<std::size_t>(n)];
    return row + r - 1;
}

}  // namespace

AssociationLp build_lp(const AssociationProblem& problem) {
    const int t = problem.num_targets;
    const int n_scans = problem.window;
    if (static_cast<int>(problem.meas_counts.size()) != n_scans)
        throw std::invalid_argument("build_lp: meas_counts size mismatch");
    int n_meas = 0;
    for (int c : problem.meas_counts) n_meas += c;

    const int rows = t + n_meas;
    const int cols = static_cast<int>(problem.hypotheses.size());
    AssociationLp lp;
    lp.a = Mat::Zero(rows, cols);
    lp.b = Vec::Ones(rows);
    lp.costs = Vec::Zero(cols);

    for (int j = 0; j < cols; ++j) {
        const LocalHypothesis& h = problem.hypotheses[static_cast<std::size_t>(j)];
        if (static_cast<int>(h.meas.size()) != n_scans)
            throw std::invalid_argument("build_lp: hypothesis window mismatch");
        lp.costs(j) = h.cost;
        if (h.target > 0) {
            if (h.target > t) throw std::invalid_argument("build_lp: target index out of range");
            lp.a(h.target - 1, j) = 1.0;
        }
        for (int n = 0; n < n_scans; ++n) {
            const int r = h.meas[static_cast<std::size_t>(n)];
            if (r < 0 || r > problem.meas_counts[static_cast<std::size_t>(n)])
                throw std::invalid_argument("build_lp: measurement index out of range");
            if (r > 0) lp.a(measurement_row(problem, n, r), j) = 1.0;
        }
    }

    lp.row_labels.reserve(static_cast<std::size_t>(rows));
    for (int i = 1; i <= t; ++i) lp.row_labels.push_back("target " + std::to_string(i));
    for (int n = 0; n < n_scans; ++n)
        for (int r = 1; r <= problem.meas_counts[static_cast<std::size_t>(n)]; ++r)
            lp.row_labels.push_back("scan " + std::to_string(n + 1) + " meas " + std::to_string(r));

    // Every row needs at least one covering column or the instance cannot
    // be feasible; report the offender by name.
    for (int i = 0; i < rows; ++i) {
        if (lp.a.row(i).cwiseAbs().maxCoeff() == 0.0)
            throw std::invalid_argument("build_lp: no covering hypothesis for " +
                                        lp.row_labels[static_cast<std::size_t>(i)]);
    }
    return lp;
}

namespace {

AssociationSolution solution_from(const Vec& x, double objective, int iterations) {
    AssociationSolution sol;
    sol.probs.resize(static_cast<std::size_t>(x.size()));
    sol.is_integral = true;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        double v = x(j);
        if (v < -1e-9 || v > 1.0 + 1e-9)
            throw std::runtime_error("association solution outside [0,1] bounds");
        v = std::clamp(v, 0.0, 1.0);
        sol.probs[static_cast<std::size_t>(j)] = v;
        if (std::abs(v - std::round(v)) > kIntegralTol) sol.is_integral = false;
    }
    sol.objective = objective;
    sol.iterations = iterations;
    return sol;
}

}  // namespace

AssociationSolution solve_lp(const AssociationLp& lp) {
    const SimplexResult res = simplex_solve(lp.a, lp.b, lp.costs);
    switch (res.status) {
        case SimplexStatus::optimal:
            break;
        case SimplexStatus::infeasible:
            throw std::runtime_error("solve_lp: infeasible instance (missing dummy coverage?)");
        case SimplexStatus::iteration_limit:
            throw std::runtime_error("solve_lp: simplex iteration limit exceeded");
        case SimplexStatus::unbounded:
            throw std::runtime_error("solve_lp: unbounded relaxation (internal error)");
    }
    return solution_from(res.x, res.objective, res.iterations);
}

namespace {

// Reduced instance for branch and bound: variables fixed at one are folded
// into the right-hand side, rows that drop to zero force their remaining
// variables to zero.
struct BnbNode {
    std::vector<signed char> fixed;  // -1 free, 0, 1
};

struct BnbReduced {
    std::vector<int> free_cols;
    Mat a;
    Vec b;
    Vec c;
    double fixed_cost = 0.0;
    bool infeasible = false;
};

BnbReduced reduce(const AssociationLp& lp, std::vector<signed char>& fixed) {
    BnbReduced red;
    const int rows = static_cast<int>(lp.a.rows());
    const int cols = static_cast<int>(lp.a.cols());
    Vec b = lp.b;
    for (int j = 0; j < cols; ++j) {
        if (fixed[static_cast<std::size_t>(j)] == 1) {
            b -= lp.a.col(j);
            red.fixed_cost += lp.costs(j);
        }
    }
    for (int i = 0; i < rows; ++i) {
        if (b(i) < -1e-9) {
            red.infeasible = true;
            return red;
        }
    }
    // Propagate: a zero-RHS row forces every free variable it touches to 0.
    bool changed = true;
    while (changed) {
        changed = false;
        for (int i = 0; i < rows; ++i) {
            if (b(i) > 1e-9) continue;
            for (int j = 0; j < cols; ++j) {
                if (fixed[static_cast<std::size_t>(j)] == -1 && lp.a(i, j) > 0.5) {
                    fixed[static_cast<std::size_t>(j)] = 0;
                    changed = true;
                }
            }
        }
    }
    for (int j = 0; j < cols; ++j)
        if (fixed[static_cast<std::size_t>(j)] == -1) red.free_cols.push_back(j);

    // Keep only rows that still constrain something.
    std::vector<int> keep_rows;
    for (int i = 0; i < rows; ++i) {
        if (b(i) > 1e-9) {
            keep_rows.push_back(i);
        }
    }
    red.a = Mat::Zero(static_cast<Eigen::Index>(keep_rows.size()),
                      static_cast<Eigen::Index>(red.free_cols.size()));
    red.b = Vec::Zero(static_cast<Eigen::Index>(keep_rows.size()));
    red.c = Vec::Zero(static_cast<Eigen::Index>(red.free_cols.size()));
    for (std::size_t jj = 0; jj < red.free_cols.size(); ++jj)
        red.c(static_cast<Eigen::Index>(jj)) = lp.costs(red.free_cols[jj]);
    for (std::size_t ii = 0; ii < keep_rows.size(); ++ii) {
        red.b(static_cast<Eigen::Index>(ii)) = b(keep_rows[ii]);
        for (std::size_t jj = 0; jj < red.free_cols.size(); ++jj)
            red.a(static_cast<Eigen::Index>(ii), static_cast<Eigen::Index>(jj)) =
                lp.a(keep_rows[ii], red.free_cols[jj]);
    }
    return red;
}

struct BnbState {
    const AssociationLp* lp;
    Vec best_x;
    double best_obj = std::numeric_limits<double>::infinity();
    long nodes = 0;
    long node_budget = 0;
    int iterations = 0;
    bool budget_exhausted = false;
};

void bnb_recurse(BnbState& st, std::vector<signed char> fixed) {
    if (st.nodes >= st.node_budget) {
        st.budget_exhausted = true;
        return;
    }
    ++st.nodes;

    BnbReduced red = reduce(*st.lp, fixed);
    if (red.infeasible) return;

    Vec x_full = Vec::Zero(st.lp->a.cols());
    for (int j = 0; j < static_cast<int>(fixed.size()); ++j)
        if (fixed[static_cast<std::size_t>(j)] == 1) x_full(j) = 1.0;

    double bound = red.fixed_cost;
    Vec x_free;
    if (!red.free_cols.empty() && red.a.rows() > 0) {
        const SimplexResult res = simplex_solve(red.a, red.b, red.c);
        st.iterations += res.iterations;
        if (res.status == SimplexStatus::infeasible) return;
        if (res.status != SimplexStatus::optimal)
            throw std::runtime_error("solve_ip: relaxation solve failed at a node");
        bound += res.objective;
        x_free = res.x;
    } else if (red.a.rows() > 0) {
        return;  // constraints remain but no free variables can meet them
    }

    if (bound >= st.best_obj - 1e-12) return;

    int frac_col = -1;
    double frac_best = kIntegralTol;
    for (Eigen::Index jj = 0; jj < x_free.size(); ++jj) {
        const double v = x_free(jj);
        const double f = std::min(v, 1.0 - v);
        if (f > frac_best) {
            frac_best = f;
            frac_col = red.free_cols[static_cast<std::size_t>(jj)];
        }
    }

    if (frac_col < 0) {
        for (Eigen::Index jj = 0; jj < x_free.size(); ++jj)
            x_full(red.free_cols[static_cast<std::size_t>(jj)]) = std::round(x_free(jj));
        st.best_obj = bound;
        st.best_x = x_full;
        return;
    }

    // Most fractional variable, one-branch first.
    auto fixed1 = fixed;
    fixed1[static_cast<std::size_t>(frac_col)] = 1;
    bnb_recurse(st, std::move(fixed1));
    auto fixed0 = std::move(fixed);
    fixed0[static_cast<std::size_t>(frac_col)] = 0;
    bnb_recurse(st, std::move(fixed0));
}

}  // namespace

AssociationSolution solve_ip(const AssociationLp& lp, long node_budget) {
    BnbState st;
    st.lp = &lp;
    st.node_budget = node_budget;

    std::vector<signed char> fixed(static_cast<std::size_t>(lp.a.cols()), -1);
    bnb_recurse(st, std::move(fixed));

    if (!std::isfinite(st.best_obj))
        throw std::runtime_error("solve_ip: no feasible 0-1 solution found");
    AssociationSolution sol = solution_from(st.best_x, st.best_obj, st.iterations);
    sol.optimal = !st.budget_exhausted;
    return sol;
}

Marginals marginals(const AssociationProblem& problem, const AssociationSolution& solution) {
    if (solution.probs.size() != problem.hypotheses.size())
        throw std::invalid_argument("marginals: solution size mismatch");
    const int t = problem.num_targets;
    const int r1 = problem.meas_counts.empty() ? 0 : problem.meas_counts.front();
    int s1 = 1;
    for (const auto& h : problem.hypotheses)
        if (h.target > 0 && !h.models.empty()) s1 = std::max(s1, h.models.front());

    Marginals m;
    m.assoc = Mat::Zero(t, r1 + 1);
    m.model = Mat::Zero(t, s1);
    for (std::size_t j = 0; j < problem.hypotheses.size(); ++j) {
        const LocalHypothesis& h = problem.hypotheses[j];
        if (h.target == 0) continue;
        const double p = solution.probs[j];
        m.assoc(h.target - 1, h.meas.front()) += p;
        m.model(h.target - 1, h.models.front() - 1) += p;
    }
    return m;
}

bool check_prop2(const AssociationProblem& problem, const AssociationSolution& candidate) {
    if (candidate.probs.size() != problem.hypotheses.size())
        throw std::invalid_argument("check_prop2: solution size mismatch");
    std::vector<double> min_cost(static_cast<std::size_t>(problem.num_targets),
                                 std::numeric_limits<double>::infinity());
    for (const auto& h : problem.hypotheses) {
        if (h.target == 0) {
            if (h.cost != 0.0) return false;
        } else {
            auto& m = min_cost[static_cast<std::size_t>(h.target - 1)];
            m = std::min(m, h.cost);
        }
    }
    for (std::size_t j = 0; j < problem.hypotheses.size(); ++j) {
        const double p = candidate.probs[j];
        if (std::abs(p - std::round(p)) > kIntegralTol) return false;
        if (p < 0.5) continue;
        const LocalHypothesis& h = problem.hypotheses[j];
        if (h.target == 0) continue;
        if (h.cost > min_cost[static_cast<std::size_t>(h.target - 1)] + 1e-12) return false;
    }
    return true;
}

std::vector<InitCandidate> track_init_lp(const std::vector<Scan>& scans,
                                         const MeasurementModel& meas_model,
                                         const ScoringParams& params, const InitParams& init) {
    params.validate();
    if (scans.size() < 2) throw std::invalid_argument("track_init_lp: need at least 2 scans");
    const int n_scans = static_cast<int>(scans.size());

    // Candidate tuples: depth-first over scans, each real measurement after
    // the first must be reachable from the previous one under the speed
    // gate. A tuple with a single real measurement is the clutter option.
    struct Candidate {
        std::vector<int> meas;
        double cost;
    };
    std::vector<Candidate> candidates;
    std::vector<int> tuple(static_cast<std::size_t>(n_scans), 0);

    const Eigen::Matrix4d f_cv = cv_transition(init.dt);
    const Eigen::Matrix4d q_cv = process_noise(init.process_q, init.dt);
    const double log_birth = std::log(params.lambda_v / params.lambda_f);

    struct Chain {
        bool born = false;
        StateVec x = StateVec::Zero();
        Eigen::Matrix4d p = Eigen::Matrix4d::Zero();
    };

    auto birth_chain = [&](const Meas& z) {
        Chain c;
        c.born = true;
        c.x << z(0), 0.0, z(1), 0.0;
        c.p.setZero();
        c.p(0, 0) = c.p(2, 2) = meas_model.R(0, 0);
        c.p(1, 1) = c.p(3, 3) = init.speed_std * init.speed_std;
        return c;
    };

    std::function<void(int, Chain, double, int)> rec = [&](int depth, Chain chain, double log_l,
                                                           int n_real) {
        if (candidates.size() >= init.max_candidates) return;
        if (depth == n_scans) {
            if (n_real >= 1) {
                const double cost =
                    init.neg_likelihood_cost ? -std::exp(log_l) : -log_l;
                candidates.push_back(Candidate{tuple, cost});
            }
            return;
        }
        const Scan& scan = scans[static_cast<std::size_t>(depth)];

        // Dummy branch: a born track that misses contributes (1 - P_d).
        tuple[static_cast<std::size_t>(depth)] = 0;
        {
            Chain next = chain;
            double ll = log_l;
            if (chain.born) {
                next.x = f_cv * chain.x;
                next.p = f_cv * chain.p * f_cv.transpose() + q_cv;
                ll += std::log(1.0 - params.p_d);
            }
            rec(depth + 1, next, ll, n_real);
        }

        for (int r = 1; r <= scan.count(); ++r) {
            const Meas& z = scan.at(r);
            if (!chain.born) {
                tuple[static_cast<std::size_t>(depth)] = r;
                rec(depth + 1, birth_chain(z), log_l + log_birth, n_real + 1);
            } else {
                const StateVec xp = f_cv * chain.x;
                const Eigen::Matrix4d pp = f_cv * chain.p * f_cv.transpose() + q_cv;
                const Meas zhat = meas_model.H * xp;
                const Eigen::Matrix2d s = meas_model.H * pp * meas_model.H.transpose() + meas_model.R;
                const Meas d = z - zhat;
                if (d.dot(s.inverse() * d) > params.gate_gamma) continue;
                const double speed = d.norm() / init.dt;
                if (speed > init.max_speed) continue;
                tuple[static_cast<std::size_t>(depth)] = r;
                Chain next;
                next.born = true;
                next.x = xp;
                next.p = pp;
                const double ll = log_l + std::log(params.p_d) +
                                  log_gaussian2(z, zhat, s) -
                                  std::log(params.lambda_f / params.volume);
                rec(depth + 1, next, ll, n_real + 1);
            }
        }
        tuple[static_cast<std::size_t>(depth)] = 0;
    };
    rec(0, Chain{}, 0.0, 0);

    if (candidates.empty()) return {};

    // Coverage rows for every real measurement; singleton tuples guarantee
    // feasibility.
    int total_meas = 0;
    std::vector<int> row_offset(static_cast<std::size_t>(n_scans), 0);
    for (int n = 0; n < n_scans; ++n) {
        row_offset[static_cast<std::size_t>(n)] = total_meas;
        total_meas += scans[static_cast<std::size_t>(n)].count();
    }
    Mat a = Mat::Zero(total_meas, static_cast<Eigen::Index>(candidates.size()));
    Vec b = Vec::Ones(total_meas);
    Vec c = Vec::Zero(static_cast<Eigen::Index>(candidates.size()));
    for (std::size_t j = 0; j < candidates.size(); ++j) {
        c(static_cast<Eigen::Index>(j)) = candidates[j].cost;
        for (int n = 0; n < n_scans; ++n) {
            const int r = candidates[j].meas[static_cast<std::size_t>(n)];
            if (r > 0)
                a(row_offset[static_cast<std::size_t>(n)] + r - 1,
                  static_cast<Eigen::Index>(j)) = 1.0;
        }
    }

    const SimplexResult res = simplex_solve(a, b, c);
    if (res.status != SimplexStatus::optimal)
        throw std::runtime_error("track_init_lp: relaxation solve failed");

    std::vector<InitCandidate> out;
    out.reserve(candidates.size());
    for (std::size_t j = 0; j < candidates.size(); ++j) {
        InitCandidate cand;
        cand.meas = candidates[j].meas;
        cand.cost = candidates[j].cost;
        cand.probability = std::clamp(res.x(static_cast<Eigen::Index>(j)), 0.0, 1.0);
        out.push_back(std::move(cand));
    }
    return out;
}

void dump_lp(const AssociationLp& lp, std::ostream& os) {
    os << "minimize";
    for (Eigen::Index j = 0; j < lp.costs.size(); ++j) os << ' ' << lp.costs(j);
    os << '\n';
    for (Eigen::Index i = 0; i < lp.a.rows(); ++i) {
        os << lp.row_labels[static_cast<std::size_t>(i)] << ':';
        for (Eigen::Index j = 0; j < lp.a.cols(); ++j) os << ' ' << lp.a(i, j);
        os << " = " << lp.b(i) << '\n';
    }
}

}  // namespace mtt
