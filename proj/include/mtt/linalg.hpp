#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace mtt {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using StateVec = Eigen::Vector4d;   // [px, vx, py, vy]
using Meas = Eigen::Vector2d;       // [px, py]

inline Mat symmetrize(const Mat& a) { return 0.5 * (a + a.transpose()); }

// Inverse of a symmetric matrix. Uses a plain solve while the matrix is well
// conditioned and falls back to an eigendecomposition pseudoinverse
// (relative eigenvalue cutoff 1e-12 * lambda_max) when it is near singular.
inline Mat sym_pseudo_inverse(const Mat& s, double cond_limit = 1e10,
                              double rel_cutoff = 1e-12) {
    if (s.rows() != s.cols()) throw std::invalid_argument("sym_pseudo_inverse: not square");
    Eigen::SelfAdjointEigenSolver<Mat> eig(symmetrize(s));
    if (eig.info() != Eigen::Success)
        throw std::runtime_error("sym_pseudo_inverse: eigendecomposition failed");
    const Vec& ev = eig.eigenvalues();
    const double lmax = ev.cwiseAbs().maxCoeff();
    const double lmin = ev.cwiseAbs().minCoeff();
    if (lmin > 0.0 && lmax / lmin < cond_limit && ev.minCoeff() > 0.0)
        return symmetrize(s).llt().solve(Mat::Identity(s.rows(), s.cols()));
    Vec inv_ev = Vec::Zero(ev.size());
    const double cutoff = rel_cutoff * lmax;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (std::abs(ev[i]) > cutoff) inv_ev[i] = 1.0 / ev[i];
    return eig.eigenvectors() * inv_ev.asDiagonal() * eig.eigenvectors().transpose();
}

inline bool is_symmetric(const Mat& a, double tol = 1e-9) {
    return (a - a.transpose()).cwiseAbs().maxCoeff() <= tol * (1.0 + a.cwiseAbs().maxCoeff());
}

inline bool is_psd(const Mat& a, double tol = 1e-9) {
    if (!is_symmetric(a, 1e-7)) return false;
    Eigen::SelfAdjointEigenSolver<Mat> eig(symmetrize(a));
    return eig.eigenvalues().minCoeff() >= -tol;
}

inline void require_finite(const Mat& a, const char* what) {
    if (!a.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite entries");
}

}  // namespace mtt
