#include "mtt/rcmkf.hpp"

#include <cmath>
#include <stdexcept>

namespace mtt {

DiscreteMatrixDistribution::DiscreteMatrixDistribution(std::vector<MatrixRealization> realizations)
    : realizations_(std::move(realizations)) {
    if (realizations_.empty())
        throw std::invalid_argument("DiscreteMatrixDistribution: empty realization set");
    const Eigen::Index r = realizations_.front().matrix.rows();
    const Eigen::Index c = realizations_.front().matrix.cols();
    double total = 0.0;
    for (const auto& x : realizations_) {
        if (x.matrix.rows() != r || x.matrix.cols() != c)
            throw std::invalid_argument("DiscreteMatrixDistribution: mismatched matrix dimensions");
        if (x.noise_cov.rows() != r || x.noise_cov.cols() != r)
            throw std::invalid_argument("DiscreteMatrixDistribution: noise covariance dimension");
        if (!(x.probability >= -1e-12) || !std::isfinite(x.probability))
            throw std::invalid_argument("DiscreteMatrixDistribution: negative probability");
        require_finite(x.matrix, "realization matrix");
        require_finite(x.noise_cov, "realization noise covariance");
        total += x.probability;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("DiscreteMatrixDistribution: probabilities must sum to 1");
}

Belief make_belief(const Vec& mean, const Mat& cov) {
    Belief b;
    b.mean = mean;
    b.cov = symmetrize(cov);
    b.second_moment = symmetrize(mean * mean.transpose() + cov);
    return b;
}

Mat mean_matrix(const DiscreteMatrixDistribution& dist) {
    Mat m = Mat::Zero(dist.rows(), dist.cols());
    for (const auto& x : dist.realizations()) m += x.probability * x.matrix;
    return m;
}

namespace {

Mat effective_cov(const DiscreteMatrixDistribution& dist, const Mat& second_moment) {
    if (second_moment.rows() != dist.cols() || second_moment.cols() != dist.cols())
        throw std::invalid_argument("effective covariance: second moment dimension mismatch");
    const Mat mean = mean_matrix(dist);
    Mat out = Mat::Zero(dist.rows(), dist.rows());
    for (const auto& x : dist.realizations()) {
        const Mat d = x.matrix - mean;
        out += x.probability * (x.noise_cov + d * second_moment * d.transpose());
    }
    return symmetrize(out);
}

}  // namespace

Mat effective_process_cov(const DiscreteMatrixDistribution& dist, const Mat& second_moment) {
    return effective_cov(dist, second_moment);
}

Mat effective_meas_cov(const DiscreteMatrixDistribution& dist, const Mat& second_moment) {
    return effective_cov(dist, second_moment);
}

Belief predict(const Belief& b, const DiscreteMatrixDistribution& f_dist) {
    if (f_dist.cols() != b.mean.size())
        throw std::invalid_argument("predict: dimension mismatch");
    const Mat fbar = mean_matrix(f_dist);
    const Mat q_eff = effective_process_cov(f_dist, b.second_moment);
    Belief out;
    out.mean = fbar * b.mean;
    out.cov = symmetrize(fbar * b.cov * fbar.transpose() + q_eff);
    out.second_moment = symmetrize(fbar * b.second_moment * fbar.transpose() + q_eff);
    return out;
}

Belief update(const Belief& b, const DiscreteMatrixDistribution& h_dist, const Vec& z) {
    if (h_dist.cols() != b.mean.size() || z.size() != h_dist.rows())
        throw std::invalid_argument("update: dimension mismatch");
    const Mat hbar = mean_matrix(h_dist);
    const Mat r_eff = effective_meas_cov(h_dist, b.second_moment);
    const Mat s = symmetrize(hbar * b.cov * hbar.transpose() + r_eff);
    if (!is_symmetric(s, 1e-7))
        throw std::runtime_error("update: innovation covariance not symmetric");
    const Mat gain = b.cov * hbar.transpose() * sym_pseudo_inverse(s);
    Belief out;
    out.mean = b.mean + gain * (z - hbar * b.mean);
    out.cov = symmetrize((Mat::Identity(b.cov.rows(), b.cov.cols()) - gain * hbar) * b.cov);
    out.second_moment = b.second_moment;
    return out;
}

}  // namespace mtt
