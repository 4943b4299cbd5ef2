#include "mtt/simplex.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace mtt {

namespace {

constexpr double kPivotEps = 1e-9;
constexpr double kCostEps = 1e-9;

struct Tableau {
    // rows 0..m-1: constraints; last column: RHS. Cost row kept separately.
    Mat t;
    Vec cost;        // reduced costs, size n_total
    double shift = 0.0;  // objective value offset (negative of priced-out part)
    std::vector<int> basis;
    int m;
    int n_total;

    void pivot(int row, int col) {
        const double p = t(row, col);
        t.row(row) /= p;
        for (int i = 0; i < m; ++i) {
            if (i == row) continue;
            const double f = t(i, col);
            if (f != 0.0) t.row(i) -= f * t.row(row);
        }
        const double cf = cost(col);
        if (cf != 0.0) {
            cost.head(n_total) -= cf * t.row(row).head(n_total).transpose();
            shift -= cf * t(row, n_total);
        }
        basis[static_cast<std::size_t>(row)] = col;
    }

    // Bland: entering = lowest index with negative reduced cost.
    int entering() const {
        for (int j = 0; j < n_total; ++j)
            if (cost(j) < -kCostEps) return j;
        return -1;
    }

    // Min-ratio row; ties broken by lowest basic variable index.
    int leaving(int col) const {
        int row = -1;
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < m; ++i) {
            const double a = t(i, col);
            if (a <= kPivotEps) continue;
            const double ratio = t(i, n_total) / a;
            if (ratio < best - 1e-12 ||
                (ratio < best + 1e-12 && (row < 0 || basis[static_cast<std::size_t>(i)] <
                                                         basis[static_cast<std::size_t>(row)]))) {
                best = ratio;
                row = i;
            }
        }
        return row;
    }
};

}  // namespace

SimplexResult simplex_solve(const Mat& a, const Vec& b, const Vec& c, int max_iterations) {
    const int m = static_cast<int>(a.rows());
    const int n = static_cast<int>(a.cols());
    if (b.size() != m || c.size() != n)
        throw std::invalid_argument("simplex_solve: dimension mismatch");
    if (max_iterations <= 0) max_iterations = 10 * (m + n);

    SimplexResult result;
    if (m == 0) {
        result.x = Vec::Zero(n);
        return result;
    }

    // Phase 1 tableau: [A | I | b] with artificial basis, sign-flipped rows
    // so the RHS is nonnegative.
    Tableau tab;
    tab.m = m;
    tab.n_total = n + m;
    tab.t = Mat::Zero(m, tab.n_total + 1);
    tab.t.block(0, 0, m, n) = a;
    tab.t.col(tab.n_total) = b;
    for (int i = 0; i < m; ++i) {
        if (tab.t(i, tab.n_total) < 0.0) tab.t.row(i) = -tab.t.row(i);
        tab.t(i, n + i) = 1.0;
        tab.basis.push_back(n + i);
    }

    // Phase 1 cost: sum of artificials, priced out against the basis.
    tab.cost = Vec::Zero(tab.n_total);
    tab.cost.segment(n, m).setOnes();
    tab.shift = 0.0;
    for (int i = 0; i < m; ++i) {
        tab.cost.head(tab.n_total) -= tab.t.row(i).head(tab.n_total).transpose();
        tab.shift -= tab.t(i, tab.n_total);
    }

    int iterations = 0;
    auto run = [&](int limit) -> SimplexStatus {
        int iters = 0;
        while (true) {
            const int col = tab.entering();
            if (col < 0) return SimplexStatus::optimal;
            const int row = tab.leaving(col);
            if (row < 0) return SimplexStatus::unbounded;
            tab.pivot(row, col);
            ++iterations;
            if (++iters > limit) return SimplexStatus::iteration_limit;
        }
    };

    SimplexStatus st = run(max_iterations);
    if (st == SimplexStatus::iteration_limit) {
        result.status = st;
        result.iterations = iterations;
        return result;
    }
    const double phase1_obj = -tab.shift;
    if (phase1_obj > 1e-7) {
        result.status = SimplexStatus::infeasible;
        result.iterations = iterations;
        return result;
    }

    // Drive any artificial still basic (at level 0) out of the basis; a row
    // with no real pivot candidate is redundant and is neutralized.
    for (int i = 0; i < m; ++i) {
        if (tab.basis[static_cast<std::size_t>(i)] < n) continue;
        int col = -1;
        for (int j = 0; j < n; ++j) {
            if (std::abs(tab.t(i, j)) > kPivotEps) {
                col = j;
                break;
            }
        }
        if (col >= 0) {
            tab.pivot(i, col);
        } else {
            tab.t.row(i).setZero();
        }
    }

    // Phase 2: forbid artificials, price the true costs out.
    tab.cost = Vec::Zero(tab.n_total);
    tab.cost.head(n) = c;
    tab.shift = 0.0;
    for (int i = 0; i < m; ++i) {
        const int bi = tab.basis[static_cast<std::size_t>(i)];
        if (bi >= n) continue;
        const double cb = c(bi);
        if (cb != 0.0) {
            tab.cost.head(tab.n_total) -= cb * tab.t.row(i).head(tab.n_total).transpose();
            tab.shift -= cb * tab.t(i, tab.n_total);
        }
    }
    tab.cost.segment(n, m).setConstant(1e30);  // artificials never re-enter

    st = run(max_iterations);
    result.iterations = iterations;
    if (st == SimplexStatus::unbounded || st == SimplexStatus::iteration_limit) {
        result.status = st;
        return result;
    }

    result.status = SimplexStatus::optimal;
    result.x = Vec::Zero(n);
    for (int i = 0; i < m; ++i) {
        const int bi = tab.basis[static_cast<std::size_t>(i)];
        if (bi < n) result.x(bi) = tab.t(i, tab.n_total);
    }
    result.objective = c.dot(result.x);
    return result;
}

}  // namespace mtt
