#pragma once

#include <vector>

#include "mtt/linalg.hpp"

namespace mtt {

// One realization of a random coefficient matrix together with the noise
// covariance active under that realization.
struct MatrixRealization {
    Mat matrix;
    Mat noise_cov;
    double probability;
};

// Finite discrete distribution over coefficient matrices. Probabilities must
// be nonnegative and sum to 1 within 1e-9; all matrices share dimensions.
class DiscreteMatrixDistribution {
public:
    explicit DiscreteMatrixDistribution(std::vector<MatrixRealization> realizations);

    const std::vector<MatrixRealization>& realizations() const { return realizations_; }
    Eigen::Index rows() const { return realizations_.front().matrix.rows(); }
    Eigen::Index cols() const { return realizations_.front().matrix.cols(); }

    static DiscreteMatrixDistribution singleton(Mat matrix, Mat noise_cov) {
        return DiscreteMatrixDistribution({{std::move(matrix), std::move(noise_cov), 1.0}});
    }

private:
    std::vector<MatrixRealization> realizations_;
};

// Filter state: conditional mean and covariance plus the unconditional second
// moment E(x x'), which the effective noise covariances depend on.
struct Belief {
    Vec mean;
    Mat cov;
    Mat second_moment;
};

// Belief with E(x0 x0') = mu mu' + P.
Belief make_belief(const Vec& mean, const Mat& cov);

// Probability-weighted mean of the realization matrices.
Mat mean_matrix(const DiscreteMatrixDistribution& dist);

// Effective process covariance:
//   sum_s P_s [ Q^(s) + (F^(s) - Fbar) E(xx') (F^(s) - Fbar)' ]
Mat effective_process_cov(const DiscreteMatrixDistribution& dist, const Mat& second_moment);

// Same shape with measurement-matrix realizations and the predicted moment.
Mat effective_meas_cov(const DiscreteMatrixDistribution& dist, const Mat& second_moment);

// Time update: mean <- Fbar mean, cov <- Fbar P Fbar' + Qtilde,
// E(xx') <- Fbar E(xx') Fbar' + Qtilde.
Belief predict(const Belief& b, const DiscreteMatrixDistribution& f_dist);

// Measurement update with gain K = P Hbar' (Hbar P Hbar' + Rtilde)^+.
// The unconditional second moment is untouched (it tracks the time recursion).
Belief update(const Belief& b, const DiscreteMatrixDistribution& h_dist, const Vec& z);

}  // namespace mtt
