#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "mtt/linalg.hpp"

namespace mtt {

struct OspaParams {
    double p = 2.0;     // order, >= 1
    double c = 1000.0;  // cutoff (m), > 0
};

// Minimum-total-cost perfect matching on a square cost matrix
// (Jonker-Volgenant style shortest augmenting paths). Returns the column
// assigned to each row and the total cost.
std::pair<std::vector<int>, double> assignment_min_cost(const Mat& cost);

// OSPA distance between two planar point sets.
double ospa(const std::vector<Meas>& x, const std::vector<Meas>& y, const OspaParams& params);

// One evaluated tracking run: per-step OSPA plus cardinalities.
struct RunResult {
    std::vector<double> ospa_per_step;
    std::vector<int> n_truth;
    std::vector<int> n_tracks;
    bool failed = false;
    std::string error;
};

struct Algorithm {
    std::string name;
    // Runs one replica with the given seed and reports per-step results.
    std::function<RunResult(std::uint64_t seed)> run;
};

struct MonteCarloResult {
    std::vector<std::string> names;
    // mean_ospa[algo][step], averaged over successful runs.
    std::vector<std::vector<double>> mean_ospa;
    std::vector<double> time_mean;  // per algorithm
    std::vector<int> failures;      // per algorithm
    // raw[algo][run] = per-run results for CSV export.
    std::vector<std::vector<RunResult>> raw;
};

// Runs `runs` replicas per algorithm with seeds base_seed + i. Replicas are
// evaluated in parallel (MTT_THREADS caps the worker count); aggregation is
// deterministic.
MonteCarloResult monte_carlo(const std::vector<Algorithm>& algorithms, std::uint64_t base_seed,
                             int runs);

}  // namespace mtt
