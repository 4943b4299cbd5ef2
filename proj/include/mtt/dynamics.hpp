#pragma once

#include <string>
#include <vector>

#include "mtt/linalg.hpp"

namespace mtt {

// Linear motion model: x' = F x + v, Cov(v) = Q. State is [px, vx, py, vy].
struct MotionModel {
    std::string label;
    Eigen::Matrix4d F;
    Eigen::Matrix4d Q;
};

using ModelSet = std::vector<MotionModel>;

// Position-only linear measurement: z = H x + w, Cov(w) = R.
struct MeasurementModel {
    Eigen::Matrix<double, 2, 4> H;
    Eigen::Matrix2d R;
};

// Constant-velocity transition over dt seconds.
Eigen::Matrix4d cv_transition(double dt);

// Coordinated-turn transition with angular rate omega (rad/s). For
// |omega| < 1e-9 the continuous limit (the CV matrix) is returned.
Eigen::Matrix4d ct_transition(double omega, double dt);

// White-noise-acceleration process covariance, intensity q (m^2/s^3),
// per-axis blocks [[dt^3/3, dt^2/2], [dt^2/2, dt]] scaled by q.
Eigen::Matrix4d process_noise(double q, double dt);

// H selects (px, py); R = sigma^2 * I.
MeasurementModel position_measurement(double sigma);

inline MotionModel make_cv_model(std::string label, double q, double dt) {
    return MotionModel{std::move(label), cv_transition(dt), process_noise(q, dt)};
}

inline MotionModel make_ct_model(std::string label, double omega, double q, double dt) {
    return MotionModel{std::move(label), ct_transition(omega, dt), process_noise(q, dt)};
}

}  // namespace mtt
