#include "mtt/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

#include "mtt/association.hpp"
#include "mtt/baselines.hpp"
#include "mtt/evaluation.hpp"
#include "mtt/rng.hpp"

namespace mtt {

namespace {

// ---------------------------------------------------------------------------
// Random association instances small enough for brute-force oracles.
// ---------------------------------------------------------------------------

AssociationProblem random_problem(Rng& rng, int t, int s, int n, const std::vector<int>& r,
                                  bool zero_dummy_cost = true) {
    AssociationProblem p;
    p.num_targets = t;
    p.window = n;
    p.meas_counts = r;

    std::vector<std::vector<int>> meas_choices(static_cast<std::size_t>(n));
    for (int tau = 1; tau <= t; ++tau) {
        // full cross product of model and measurement indices
        std::vector<LocalHypothesis> partial;
        partial.push_back(LocalHypothesis{tau, {}, {}, 0.0, 0.0});
        for (int scan = 0; scan < n; ++scan) {
            std::vector<LocalHypothesis> next;
            for (const auto& h : partial) {
                for (int sm = 1; sm <= s; ++sm) {
                    for (int rm = 0; rm <= r[static_cast<std::size_t>(scan)]; ++rm) {
                        LocalHypothesis copy = h;
                        copy.models.push_back(sm);
                        copy.meas.push_back(rm);
                        next.push_back(std::move(copy));
                    }
                }
            }
            partial = std::move(next);
        }
        for (auto& h : partial) {
            h.cost = rng.uniform(-5.0, 5.0);
            h.log_likelihood = -h.cost;
            p.hypotheses.push_back(std::move(h));
        }
    }
    for (int scan = 0; scan < n; ++scan) {
        for (int rm = 1; rm <= r[static_cast<std::size_t>(scan)]; ++rm) {
            LocalHypothesis h;
            h.target = 0;
            h.models.assign(static_cast<std::size_t>(n), 1);
            h.meas.assign(static_cast<std::size_t>(n), 0);
            h.meas[static_cast<std::size_t>(scan)] = rm;
            h.cost = zero_dummy_cost ? 0.0 : rng.uniform(0.0, 1.0);
            h.log_likelihood = -h.cost;
            p.hypotheses.push_back(std::move(h));
        }
    }
    return p;
}

// Exhaustive 0-1 oracle: each target picks exactly one hypothesis, shared
// measurements prune the branch, uncovered measurements pay their
// dummy-target cost.
double exhaustive_ip_objective(const AssociationProblem& p) {
    std::vector<std::vector<const LocalHypothesis*>> per_target(
        static_cast<std::size_t>(p.num_targets));
    int total_meas = 0;
    std::vector<int> offset(p.meas_counts.size(), 0);
    for (std::size_t n = 0; n < p.meas_counts.size(); ++n) {
        offset[n] = total_meas;
        total_meas += p.meas_counts[n];
    }
    std::vector<double> dummy_cost(static_cast<std::size_t>(total_meas), 0.0);
    for (const auto& h : p.hypotheses) {
        if (h.target > 0) {
            per_target[static_cast<std::size_t>(h.target - 1)].push_back(&h);
        } else {
            for (std::size_t n = 0; n < h.meas.size(); ++n)
                if (h.meas[n] > 0) dummy_cost[static_cast<std::size_t>(offset[n] + h.meas[n] - 1)] =
                    h.cost;
        }
    }

    double best = std::numeric_limits<double>::infinity();
    std::vector<int> used(static_cast<std::size_t>(total_meas), 0);
    std::function<void(int, double)> rec = [&](int tau, double acc) {
        if (tau == p.num_targets) {
            double obj = acc;
            for (int m = 0; m < total_meas; ++m)
                if (!used[static_cast<std::size_t>(m)]) obj += dummy_cost[static_cast<std::size_t>(m)];
            best = std::min(best, obj);
            return;
        }
        for (const LocalHypothesis* h : per_target[static_cast<std::size_t>(tau)]) {
            bool ok = true;
            for (std::size_t n = 0; n < h->meas.size(); ++n) {
                if (h->meas[n] > 0 &&
                    used[static_cast<std::size_t>(offset[n] + h->meas[n] - 1)]) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
            for (std::size_t n = 0; n < h->meas.size(); ++n)
                if (h->meas[n] > 0) ++used[static_cast<std::size_t>(offset[n] + h->meas[n] - 1)];
            rec(tau + 1, acc + h->cost);
            for (std::size_t n = 0; n < h->meas.size(); ++n)
                if (h->meas[n] > 0) --used[static_cast<std::size_t>(offset[n] + h->meas[n] - 1)];
        }
    };
    rec(0, 0.0);
    return best;
}

// Basic-solution enumeration oracle for the relaxation: try every column
// subset of size = rows as a candidate basis.
double vertex_enumeration_objective(const AssociationLp& lp) {
    const int m = static_cast<int>(lp.a.rows());
    const int n = static_cast<int>(lp.a.cols());
    std::vector<int> cols(static_cast<std::size_t>(n));
    std::iota(cols.begin(), cols.end(), 0);
    std::vector<int> pick(static_cast<std::size_t>(m));
    double best = std::numeric_limits<double>::infinity();

    std::function<void(int, int)> rec = [&](int start, int depth) {
        if (depth == m) {
            Mat basis(m, m);
            for (int j = 0; j < m; ++j) basis.col(j) = lp.a.col(pick[static_cast<std::size_t>(j)]);
            Eigen::FullPivLU<Mat> lu(basis);
            if (!lu.isInvertible()) return;
            const Vec xb = lu.solve(lp.b);
            for (int j = 0; j < m; ++j)
                if (xb(j) < -1e-9 || xb(j) > 1.0 + 1e-9) return;
            double obj = 0.0;
            for (int j = 0; j < m; ++j) obj += lp.costs(pick[static_cast<std::size_t>(j)]) * xb(j);
            best = std::min(best, obj);
            return;
        }
        for (int c = start; c < n; ++c) {
            pick[static_cast<std::size_t>(depth)] = c;
            rec(c + 1, depth + 1);
        }
    };
    rec(0, 0);
    return best;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

double binom(int n, int k) {
    double v = 1.0;
    for (int i = 1; i <= k; ++i) v *= static_cast<double>(n - k + i) / i;
    return v;
}

SuiteResult lp_vertex_suite(Rng& rng) {
    SuiteResult res{"lp-vs-vertex-enumeration", true, ""};
    int checked = 0;
    for (int iter = 0; iter < 200 && checked < 60; ++iter) {
        const int t = 1 + static_cast<int>(rng.index(2));
        const int n = 1 + static_cast<int>(rng.index(2));
        std::vector<int> r;
        for (int i = 0; i < n; ++i) r.push_back(1 + static_cast<int>(rng.index(2)));
        const int s = t == 2 && n == 2 ? 1 : 1 + static_cast<int>(rng.index(2));
        const AssociationProblem p = random_problem(rng, t, s, n, r);
        const AssociationLp lp = build_lp(p);
        if (binom(static_cast<int>(lp.a.cols()), static_cast<int>(lp.a.rows())) > 5000.0)
            continue;
        const AssociationSolution sol = solve_lp(lp);
        const double oracle = vertex_enumeration_objective(lp);
        ++checked;
        if (std::abs(sol.objective - oracle) > 1e-8) {
            res.passed = false;
            res.detail = "objective " + fmt(sol.objective) + " vs oracle " + fmt(oracle);
            return res;
        }
    }
    res.passed = res.passed && checked >= 40;
    res.detail = std::to_string(checked) + " instances";
    return res;
}

SuiteResult ip_exhaustive_suite(Rng& rng) {
    SuiteResult res{"ip-vs-exhaustive-enumeration", true, ""};
    int strict_gaps = 0;
    for (int iter = 0; iter < 150; ++iter) {
        const int t = 1 + static_cast<int>(rng.index(3));
        const int n = 1 + static_cast<int>(rng.index(2));
        std::vector<int> r;
        for (int i = 0; i < n; ++i) r.push_back(1 + static_cast<int>(rng.index(3)));
        const AssociationProblem p = random_problem(rng, t, 1 + static_cast<int>(rng.index(2)), n, r);
        const AssociationLp lp = build_lp(p);
        const AssociationSolution ip = solve_ip(lp);
        const AssociationSolution relax = solve_lp(lp);
        const double oracle = exhaustive_ip_objective(p);
        if (std::abs(ip.objective - oracle) > 1e-8) {
            res.passed = false;
            res.detail = "ip " + fmt(ip.objective) + " vs oracle " + fmt(oracle);
            return res;
        }
        if (relax.objective > ip.objective + 1e-9) {
            res.passed = false;
            res.detail = "relaxation above exact optimum";
            return res;
        }
        if (ip.objective - relax.objective > 1e-6) ++strict_gaps;
    }
    res.detail = "150 instances, " + std::to_string(strict_gaps) + " strict gaps";
    return res;
}

SuiteResult rcmkf_kf_suite(Rng& rng) {
    SuiteResult res{"rcmkf-degenerate-vs-kf", true, ""};
    Mat f(2, 2), q(2, 2), h(1, 2), r(1, 1);
    f << 1.0, 0.5, 0.0, 1.0;
    q << 0.02, 0.0, 0.0, 0.05;
    h << 1.0, 0.0;
    r << 0.4;
    const auto f_dist = DiscreteMatrixDistribution::singleton(f, q);
    const auto h_dist = DiscreteMatrixDistribution::singleton(h, r);

    Vec mean(2);
    mean << rng.gaussian(), rng.gaussian();
    Mat cov = Mat::Identity(2, 2);
    Belief b = make_belief(mean, cov);
    Vec kf_mean = mean;
    Mat kf_cov = cov;

    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        Vec z(1);
        z << rng.gaussian(0.0, 2.0);
        b = update(predict(b, f_dist), h_dist, z);
        std::tie(kf_mean, kf_cov) = kf_step(kf_mean, kf_cov, f, q, h, r, z);
        worst = std::max(worst, (b.mean - kf_mean).cwiseAbs().maxCoeff());
        worst = std::max(worst, (b.cov - kf_cov).cwiseAbs().maxCoeff());
    }
    res.passed = worst <= 1e-10;
    res.detail = "max deviation " + fmt(worst);
    return res;
}

SuiteResult ospa_brute_suite(Rng& rng) {
    SuiteResult res{"ospa-vs-permutation-bruteforce", true, ""};
    const OspaParams params{1.5, 8.0};
    for (int iter = 0; iter < 300; ++iter) {
        std::vector<Meas> x(rng.index(5)), y(rng.index(5));
        for (auto& v : x) v = Meas(rng.uniform(-10, 10), rng.uniform(-10, 10));
        for (auto& v : y) v = Meas(rng.uniform(-10, 10), rng.uniform(-10, 10));

        double expected;
        if (x.empty() && y.empty()) {
            expected = 0.0;
        } else if (x.empty() || y.empty()) {
            expected = params.c;
        } else {
            const std::vector<Meas>* small = &x;
            const std::vector<Meas>* big = &y;
            if (small->size() > big->size()) std::swap(small, big);
            const std::size_t n = big->size();
            std::vector<int> perm(n);
            std::iota(perm.begin(), perm.end(), 0);
            double best = std::numeric_limits<double>::infinity();
            do {
                double total = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (i < small->size()) {
                        const double d = std::min(
                            params.c,
                            ((*small)[i] - (*big)[static_cast<std::size_t>(perm[i])]).norm());
                        total += std::pow(d, params.p);
                    } else {
                        total += std::pow(params.c, params.p);
                    }
                }
                best = std::min(best, total);
            } while (std::next_permutation(perm.begin(), perm.end()));
            expected = std::pow(best / static_cast<double>(n), 1.0 / params.p);
        }
        const double got = ospa(x, y, params);
        if (std::abs(got - expected) > 1e-12) {
            res.passed = false;
            res.detail = "ospa " + fmt(got) + " vs brute " + fmt(expected);
            return res;
        }
    }
    res.detail = "300 set pairs";
    return res;
}

SuiteResult moment_law_suite(Rng& rng) {
    SuiteResult res{"sampled-moment-law", true, ""};
    // scalar system with two transition realizations
    const double f1 = 0.9, f2 = 1.1, p1 = 0.6;
    const double q1 = 0.04, q2 = 0.09;
    const double mu0 = 1.0, var0 = 0.25;
    const int horizon = 10;
    const int samples = 100000;

    Mat m_f1(1, 1), m_f2(1, 1), m_q1(1, 1), m_q2(1, 1);
    m_f1 << f1;
    m_f2 << f2;
    m_q1 << q1;
    m_q2 << q2;
    const DiscreteMatrixDistribution f_dist(
        {{m_f1, m_q1, p1}, {m_f2, m_q2, 1.0 - p1}});

    // recursion for E(x_k^2)
    std::vector<double> exx(static_cast<std::size_t>(horizon) + 1);
    exx[0] = mu0 * mu0 + var0;
    for (int k = 0; k < horizon; ++k) {
        Mat second(1, 1);
        second << exx[static_cast<std::size_t>(k)];
        const double q_eff = effective_process_cov(f_dist, second)(0, 0);
        const double fbar = mean_matrix(f_dist)(0, 0);
        exx[static_cast<std::size_t>(k) + 1] = fbar * exx[static_cast<std::size_t>(k)] * fbar + q_eff;
    }

    std::vector<double> sum_sq(static_cast<std::size_t>(horizon) + 1, 0.0);
    std::vector<double> sum_q4(static_cast<std::size_t>(horizon) + 1, 0.0);
    for (int i = 0; i < samples; ++i) {
        double x = rng.gaussian(mu0, std::sqrt(var0));
        sum_sq[0] += x * x;
        sum_q4[0] += x * x * x * x;
        for (int k = 1; k <= horizon; ++k) {
            const bool first = rng.bernoulli(p1);
            const double f = first ? f1 : f2;
            const double qv = first ? q1 : q2;
            x = f * x + rng.gaussian(0.0, std::sqrt(qv));
            sum_sq[static_cast<std::size_t>(k)] += x * x;
            sum_q4[static_cast<std::size_t>(k)] += x * x * x * x;
        }
    }
    for (int k = 0; k <= horizon; ++k) {
        const double mean_sq = sum_sq[static_cast<std::size_t>(k)] / samples;
        const double var_sq =
            sum_q4[static_cast<std::size_t>(k)] / samples - mean_sq * mean_sq;
        const double se = std::sqrt(std::max(var_sq, 0.0) / samples);
        if (std::abs(mean_sq - exx[static_cast<std::size_t>(k)]) > 3.0 * se + 1e-12) {
            res.passed = false;
            res.detail = "step " + std::to_string(k) + ": sampled " + fmt(mean_sq) +
                         " vs recursion " + fmt(exx[static_cast<std::size_t>(k)]);
            return res;
        }
    }
    res.detail = "moments within 3 standard errors over " + std::to_string(horizon) + " steps";
    return res;
}

}  // namespace

std::vector<SuiteResult> run_selftest(std::uint64_t seed) {
    std::vector<SuiteResult> out;
    {
        Rng rng(seed);
        out.push_back(lp_vertex_suite(rng));
    }
    {
        Rng rng(seed + 1);
        out.push_back(ip_exhaustive_suite(rng));
    }
    {
        Rng rng(seed + 2);
        out.push_back(rcmkf_kf_suite(rng));
    }
    {
        Rng rng(seed + 3);
        out.push_back(ospa_brute_suite(rng));
    }
    {
        Rng rng(seed + 4);
        out.push_back(moment_law_suite(rng));
    }
    return out;
}

}  // namespace mtt
