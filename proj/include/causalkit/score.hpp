#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>

namespace causalkit {

// Kernel settings for the score estimator. A missing bandwidth means the
// median pairwise-distance heuristic.
struct KernelConfig {
    std::optional<double> bandwidth;
    double ridge_eta = 0.05;

    double resolve_bandwidth(const Eigen::MatrixXd& data) const;
};

// Per-sample score estimates with the Jacobian-diagonal estimates and the
// per-variable variances driving leaf detection.
struct ScoreField {
    Eigen::MatrixXd scores;
    Eigen::MatrixXd jac_diag;
    Eigen::VectorXd var_diag;
};

// Median of pairwise Euclidean row distances. Exact up to 2000 rows, a
// seeded 2000-row subsample above that.
double median_bandwidth(const Eigen::MatrixXd& data, std::uint64_t subsample_seed = 0);

// K_ij = exp(-|x_i - x_j|^2 / (2 sigma^2)).
Eigen::MatrixXd rbf_kernel(const Eigen::MatrixXd& data, double sigma);

// Stein estimate of s(x) = grad log p(x) at each sample row.
Eigen::MatrixXd stein_score(const Eigen::MatrixXd& data, const KernelConfig& cfg);

// Second-order Stein estimate of d s_a(x_i) / d x_a.
Eigen::MatrixXd jacobian_diag(const Eigen::MatrixXd& data, const KernelConfig& cfg);

// Unbiased per-column sample variance.
Eigen::VectorXd diag_variance(const Eigen::MatrixXd& jac_diag);

ScoreField score_field(const Eigen::MatrixXd& data, const KernelConfig& cfg);

}  // namespace causalkit
