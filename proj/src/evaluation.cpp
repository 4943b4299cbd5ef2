#include "mtt/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <thread>

namespace mtt {

std::pair<std::vector<int>, double> assignment_min_cost(const Mat& cost) {
    if (cost.rows() != cost.cols()) throw std::invalid_argument("assignment_min_cost: not square");
    require_finite(cost, "assignment cost matrix");
    const int n = static_cast<int>(cost.rows());
    if (n == 0) return {{}, 0.0};

    // Shortest augmenting path with dual potentials, 1-based work arrays.
    std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<int> p(static_cast<std::size_t>(n) + 1, 0);
    std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);
    const double inf = std::numeric_limits<double>::infinity();

    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(n) + 1, inf);
        std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
        do {
            used[static_cast<std::size_t>(j0)] = 1;
            const int i0 = p[static_cast<std::size_t>(j0)];
            int j1 = 0;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] -
                                   v[static_cast<std::size_t>(j)];
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[static_cast<std::size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<std::size_t>(j0)];
            p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
    double total = 0.0;
    for (int j = 1; j <= n; ++j) {
        if (p[static_cast<std::size_t>(j)] > 0) {
            row_to_col[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
            total += cost(p[static_cast<std::size_t>(j)] - 1, j - 1);
        }
    }
    return {row_to_col, total};
}

double ospa(const std::vector<Meas>& x, const std::vector<Meas>& y, const OspaParams& params) {
    if (!(params.p >= 1.0)) throw std::invalid_argument("ospa: order p must be >= 1");
    if (!(params.c > 0.0)) throw std::invalid_argument("ospa: cutoff c must be > 0");
    const std::vector<Meas>* small = &x;
    const std::vector<Meas>* big = &y;
    if (small->size() > big->size()) std::swap(small, big);
    const int m = static_cast<int>(small->size());
    const int n = static_cast<int>(big->size());
    if (n == 0) return 0.0;
    if (m == 0) return params.c;

    const double cp = std::pow(params.c, params.p);
    Mat cost(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i < m) {
                const double d = std::min(params.c, ((*small)[static_cast<std::size_t>(i)] -
                                                     (*big)[static_cast<std::size_t>(j)])
                                                        .norm());
                cost(i, j) = std::pow(d, params.p);
            } else {
                cost(i, j) = cp;  // cardinality penalty rows
            }
        }
    }
    const double total = assignment_min_cost(cost).second;
    return std::pow(total / n, 1.0 / params.p);
}

namespace {

int worker_count() {
    if (const char* env = std::getenv("MTT_THREADS")) {
        const int k = std::atoi(env);
        if (k >= 1) return k;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

MonteCarloResult monte_carlo(const std::vector<Algorithm>& algorithms, std::uint64_t base_seed,
                             int runs) {
    if (runs < 1) throw std::invalid_argument("monte_carlo: runs must be >= 1");
    MonteCarloResult result;
    result.raw.resize(algorithms.size());
    for (const auto& algo : algorithms) result.names.push_back(algo.name);

    for (std::size_t ai = 0; ai < algorithms.size(); ++ai) {
        auto& slots = result.raw[ai];
        slots.resize(static_cast<std::size_t>(runs));
        std::atomic<int> next{0};
        const int workers = std::min(worker_count(), runs);
        auto body = [&]() {
            while (true) {
                const int i = next.fetch_add(1);
                if (i >= runs) break;
                try {
                    slots[static_cast<std::size_t>(i)] =
                        algorithms[ai].run(base_seed + static_cast<std::uint64_t>(i));
                } catch (const std::exception& e) {
                    slots[static_cast<std::size_t>(i)].failed = true;
                    slots[static_cast<std::size_t>(i)].error = e.what();
                }
            }
        };
        if (workers <= 1) {
            body();
        } else {
            std::vector<std::thread> pool;
            pool.reserve(static_cast<std::size_t>(workers));
            for (int w = 0; w < workers; ++w) pool.emplace_back(body);
            for (auto& th : pool) th.join();
        }
    }

    for (std::size_t ai = 0; ai < algorithms.size(); ++ai) {
        std::size_t steps = 0;
        for (const auto& r : result.raw[ai])
            if (!r.failed) steps = std::max(steps, r.ospa_per_step.size());
        std::vector<double> mean(steps, 0.0);
        std::vector<int> counts(steps, 0);
        int failures = 0;
        for (const auto& r : result.raw[ai]) {
            if (r.failed) {
                ++failures;
                continue;
            }
            for (std::size_t k = 0; k < r.ospa_per_step.size(); ++k) {
                mean[k] += r.ospa_per_step[k];
                ++counts[k];
            }
        }
        double overall = 0.0;
        for (std::size_t k = 0; k < steps; ++k) {
            mean[k] = counts[k] > 0 ? mean[k] / counts[k] : 0.0;
            overall += mean[k];
        }
        result.mean_ospa.push_back(std::move(mean));
        result.time_mean.push_back(steps > 0 ? overall / static_cast<double>(steps) : 0.0);
        result.failures.push_back(failures);
    }
    return result;
}

}  // namespace mtt
