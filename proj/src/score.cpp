#include "causalkit/score.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "causalkit/errors.hpp"

namespace causalkit {

namespace {

constexpr int kExactMedianRowLimit = 2000;

Eigen::MatrixXd solve_spd(const Eigen::MatrixXd& kernel, double eta, const Eigen::MatrixXd& rhs) {
    Eigen::MatrixXd regularized = kernel;
    regularized.diagonal().array() += eta;
    Eigen::LLT<Eigen::MatrixXd> llt(regularized);
    if (llt.info() != Eigen::Success) {
        // One bounded retry with a stiffer ridge.
        regularized.diagonal().array() += 9.0 * eta;
        llt.compute(regularized);
        if (llt.info() != Eigen::Success)
            throw NumericError("kernel system is not positive definite; increase ridge_eta");
    }
    return llt.solve(rhs);
}

// Sum_j d k(x_i, x_j) / d x_{j,a}  =  sum_j K_ij (x_{i,a} - x_{j,a}) / sigma^2.
Eigen::MatrixXd kernel_gradient_sum(const Eigen::MatrixXd& kernel, const Eigen::MatrixXd& data, double sigma) {
    Eigen::VectorXd row_sums = kernel.rowwise().sum();
    Eigen::MatrixXd grad = row_sums.asDiagonal() * data - kernel * data;
    return grad / (sigma * sigma);
}

// Sum_j K_ij ((x_{i,a} - x_{j,a})^2 / sigma^4 - 1 / sigma^2).
Eigen::MatrixXd kernel_laplacian_sum(const Eigen::MatrixXd& kernel, const Eigen::MatrixXd& data, double sigma) {
    double s2 = sigma * sigma;
    Eigen::VectorXd row_sums = kernel.rowwise().sum();
    Eigen::Index n = data.rows(), d = data.cols();
    Eigen::MatrixXd out(n, d);
    for (Eigen::Index a = 0; a < d; ++a) {
        Eigen::VectorXd u = data.col(a);
        Eigen::VectorXd ku = kernel * u;
        Eigen::VectorXd ku2 = kernel * u.cwiseProduct(u);
        out.col(a) = (u.cwiseProduct(u).cwiseProduct(row_sums) - 2.0 * u.cwiseProduct(ku) + ku2) / (s2 * s2) -
                     row_sums / s2;
    }
    return out;
}

}  // namespace

double median_bandwidth(const Eigen::MatrixXd& data, std::uint64_t subsample_seed) {
    Eigen::Index n = data.rows();
    if (n < 2) throw ContractError("median_bandwidth requires at least two rows");
    Eigen::MatrixXd rows = data;
    if (n > kExactMedianRowLimit) {
        std::mt19937_64 rng(subsample_seed);
        std::vector<Eigen::Index> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::shuffle(idx.begin(), idx.end(), rng);
        rows.resize(kExactMedianRowLimit, data.cols());
        for (int r = 0; r < kExactMedianRowLimit; ++r) rows.row(r) = data.row(idx[r]);
    }
    Eigen::Index m = rows.rows();
    std::vector<double> dists;
    dists.reserve(static_cast<size_t>(m) * (m - 1) / 2);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = i + 1; j < m; ++j) dists.push_back((rows.row(i) - rows.row(j)).norm());
    size_t mid = dists.size() / 2;
    std::nth_element(dists.begin(), dists.begin() + mid, dists.end());
    double median = dists[mid];
    if (dists.size() % 2 == 0) {
        double below = *std::max_element(dists.begin(), dists.begin() + mid);
        median = 0.5 * (below + median);
    }
    if (median <= 0.0) throw DegenerateDataError("median pairwise distance is zero; rows are (near) identical");
    return median;
}

double KernelConfig::resolve_bandwidth(const Eigen::MatrixXd& data) const {
    if (ridge_eta <= 0.0) throw ConfigError("ridge_eta must be positive");
    if (bandwidth) {
        if (*bandwidth <= 0.0) throw ConfigError("bandwidth must be positive");
        return *bandwidth;
    }
    return median_bandwidth(data);
}

Eigen::MatrixXd rbf_kernel(const Eigen::MatrixXd& data, double sigma) {
    if (sigma <= 0.0) throw ContractError("rbf_kernel requires sigma > 0");
    Eigen::VectorXd sq_norms = data.rowwise().squaredNorm();
    Eigen::MatrixXd sq_dists = sq_norms.replicate(1, data.rows()) + sq_norms.transpose().replicate(data.rows(), 1) -
                               2.0 * data * data.transpose();
    return (-sq_dists.array().max(0.0) / (2.0 * sigma * sigma)).exp();
}

Eigen::MatrixXd stein_score(const Eigen::MatrixXd& data, const KernelConfig& cfg) {
    double sigma = cfg.resolve_bandwidth(data);
    Eigen::MatrixXd kernel = rbf_kernel(data, sigma);
    return -solve_spd(kernel, cfg.ridge_eta, kernel_gradient_sum(kernel, data, sigma));
}

Eigen::MatrixXd jacobian_diag(const Eigen::MatrixXd& data, const KernelConfig& cfg) {
    double sigma = cfg.resolve_bandwidth(data);
    Eigen::MatrixXd kernel = rbf_kernel(data, sigma);
    Eigen::MatrixXd score = -solve_spd(kernel, cfg.ridge_eta, kernel_gradient_sum(kernel, data, sigma));
    Eigen::MatrixXd correction = solve_spd(kernel, cfg.ridge_eta, kernel_laplacian_sum(kernel, data, sigma));
    return -score.cwiseProduct(score) + correction;
}

Eigen::VectorXd diag_variance(const Eigen::MatrixXd& jac_diag) {
    Eigen::Index n = jac_diag.rows();
    if (n < 2) throw ContractError("diag_variance requires at least two rows");
    Eigen::RowVectorXd means = jac_diag.colwise().mean();
    return (jac_diag.rowwise() - means).colwise().squaredNorm() / static_cast<double>(n - 1);
}

ScoreField score_field(const Eigen::MatrixXd& data, const KernelConfig& cfg) {
    ScoreField field;
    double sigma = cfg.resolve_bandwidth(data);
    Eigen::MatrixXd kernel = rbf_kernel(data, sigma);
    field.scores = -solve_spd(kernel, cfg.ridge_eta, kernel_gradient_sum(kernel, data, sigma));
    Eigen::MatrixXd correction = solve_spd(kernel, cfg.ridge_eta, kernel_laplacian_sum(kernel, data, sigma));
    field.jac_diag = -field.scores.cwiseProduct(field.scores) + correction;
    field.var_diag = diag_variance(field.jac_diag);
    return field;
}

}  // namespace causalkit
