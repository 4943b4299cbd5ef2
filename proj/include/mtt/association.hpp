#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mtt/hypothesis.hpp"
#include "mtt/simplex.hpp"

namespace mtt {

// Association instance over one N-scan window. meas_counts holds R_n per
// scan. Feasibility is guaranteed by the all-dummy hypotheses (targets) and
// the dummy-target hypotheses (measurements).
struct AssociationProblem {
    std::vector<LocalHypothesis> hypotheses;
    int num_targets = 0;
    std::vector<int> meas_counts;
    int window = 1;
};

struct AssociationSolution {
    std::vector<double> probs;
    double objective = 0.0;
    bool is_integral = false;
    bool optimal = true;   // false when the branch-and-bound node budget ran out
    int iterations = 0;
};

// First-scan marginals. assoc is T x (R_1 + 1) with the dummy in column 0;
// model is T x S_1. Rows sum to 1 by the target constraints.
struct Marginals {
    Mat assoc;
    Mat model;
};

// Equality-form LP over hypothesis probabilities: one row per target, one
// row per real measurement.
struct AssociationLp {
    Mat a;
    Vec b;
    Vec costs;
    std::vector<std::string> row_labels;
};

AssociationLp build_lp(const AssociationProblem& problem);

// Relaxed problem; returns a basic (vertex) optimal solution.
AssociationSolution solve_lp(const AssociationLp& lp);

// Exact 0-1 solution by depth-first branch and bound on the LP relaxation.
AssociationSolution solve_ip(const AssociationLp& lp, long node_budget = 1000000);

Marginals marginals(const AssociationProblem& problem, const AssociationSolution& solution);

// True iff every selected hypothesis attains its target's minimum cost and
// all dummy-target hypotheses cost zero — the condition under which the
// relaxation is tight.
bool check_prop2(const AssociationProblem& problem, const AssociationSolution& candidate);

struct InitParams {
    double dt = 5.0;            // scan period used for the birth chain (s)
    double speed_std = 150.0;   // birth velocity prior std dev (m/s)
    double max_speed = 500.0;   // candidate pair speed gate (m/s)
    double process_q = 4.0;     // chain process noise intensity
    bool neg_likelihood_cost = false;  // use C_r = -L_r instead of -log L_r
    std::size_t max_candidates = 4000;
};

struct InitCandidate {
    std::vector<int> meas;  // per-scan measurement index, 0 = none
    double cost = 0.0;
    double probability = 0.0;
};

// New-track formation over >= 2 scans of unassigned measurements: candidate
// tuples are scored against a birth prior, each real measurement must be
// covered with total probability one, and the tuple probabilities come from
// the LP vertex.
std::vector<InitCandidate> track_init_lp(const std::vector<Scan>& scans,
                                         const MeasurementModel& meas_model,
                                         const ScoringParams& params, const InitParams& init);

// Plain-text tableau dump (cost header, one constraint per line).
void dump_lp(const AssociationLp& lp, std::ostream& os);

}  // namespace mtt
