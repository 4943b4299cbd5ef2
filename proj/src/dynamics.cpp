#include "mtt/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace mtt {

Eigen::Matrix4d cv_transition(double dt) {
    if (!std::isfinite(dt)) throw std::invalid_argument("cv_transition: dt not finite");
    Eigen::Matrix4d f = Eigen::Matrix4d::Identity();
    f(0, 1) = dt;
    f(2, 3) = dt;
    return f;
}

Eigen::Matrix4d ct_transition(double omega, double dt) {
    if (!std::isfinite(omega) || !std::isfinite(dt))
        throw std::invalid_argument("ct_transition: non-finite input");
    if (std::abs(omega) < 1e-9) return cv_transition(dt);
    const double wt = omega * dt;
    const double s = std::sin(wt);
    const double c = std::cos(wt);
    Eigen::Matrix4d f = Eigen::Matrix4d::Zero();
    f(0, 0) = 1.0;
    f(0, 1) = s / omega;
    f(0, 3) = -(1.0 - c) / omega;
    f(1, 1) = c;
    f(1, 3) = -s;
    f(2, 1) = (1.0 - c) / omega;
    f(2, 2) = 1.0;
    f(2, 3) = s / omega;
    f(3, 1) = s;
    f(3, 3) = c;
    return f;
}

Eigen::Matrix4d process_noise(double q, double dt) {
    if (!std::isfinite(q) || q < 0.0) throw std::invalid_argument("process_noise: q must be >= 0");
    if (!std::isfinite(dt)) throw std::invalid_argument("process_noise: dt not finite");
    const double t3 = dt * dt * dt / 3.0;
    const double t2 = dt * dt / 2.0;
    Eigen::Matrix4d qm = Eigen::Matrix4d::Zero();
    qm(0, 0) = t3;
    qm(0, 1) = qm(1, 0) = t2;
    qm(1, 1) = dt;
    qm(2, 2) = t3;
    qm(2, 3) = qm(3, 2) = t2;
    qm(3, 3) = dt;
    return q * qm;
}

MeasurementModel position_measurement(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw std::invalid_argument("position_measurement: sigma must be > 0");
    MeasurementModel m;
    m.H.setZero();
    m.H(0, 0) = 1.0;
    m.H(1, 2) = 1.0;
    m.R = sigma * sigma * Eigen::Matrix2d::Identity();
    return m;
}

}  // namespace mtt
