#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mtt/hypothesis.hpp"
#include "mtt/rng.hpp"

namespace mtt {

// One leg of a trajectory: straight flight or a coordinated turn.
struct Segment {
    enum class Kind { cv, ct };
    Kind kind = Kind::cv;
    int duration = 1;     // steps
    double omega = 0.0;   // rad/s, turns only
};

struct Rect {
    double x_min = 0.0, y_min = 0.0, x_max = 0.0, y_max = 0.0;
    double area() const { return (x_max - x_min) * (y_max - y_min); }
};

struct ScenarioConfig {
    double dt = 5.0;
    std::vector<Segment> segments;
    std::vector<StateVec> initial_states;
    double spacing = 1000.0;
    double p_d = 0.9;
    double lambda_f = 50.0;
    double sigma_z = 400.0;
    std::optional<Rect> region;  // defaults to the inflated truth bounding box
    std::uint64_t seed = 1;
    double truth_noise_q = 0.0;

    void validate() const;
};

// Three targets, westbound, +1 deg/s quarter turn, southbound, -3 deg/s
// quarter turn, westbound again; 70 steps at dt = 5 s.
ScenarioConfig default_scenario();

struct GroundTruth {
    // states[step][target]
    std::vector<std::vector<StateVec>> states;
    int steps() const { return static_cast<int>(states.size()); }
    int targets() const { return states.empty() ? 0 : static_cast<int>(states.front().size()); }
};

// Noiseless segment propagation; with truth_noise_q > 0 process noise is
// added from a derived stream of the scenario seed.
GroundTruth generate_truth(const ScenarioConfig& cfg);

// Bounding box of all true positions inflated by `inflate` per side.
Rect auto_region(const GroundTruth& truth, double inflate = 2000.0);

struct ScanSet {
    std::vector<Scan> scans;
    // origins[step][meas] = target index (0-based) or -1 for clutter;
    // parallel to scans[step].measurements.
    std::vector<std::vector<int>> origins;
    Rect region;
    double volume = 0.0;
};

// Detection thinning with probability p_d, Gaussian position noise, Poisson
// clutter uniform over the region, shuffled measurement order.
ScanSet generate_scans(const GroundTruth& truth, const ScenarioConfig& cfg, Rng& rng);

}  // namespace mtt
