#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "causalkit/panel.hpp"

namespace causalkit {

struct CorrelationMatrix {
    std::vector<std::string> codes;
    Eigen::MatrixXd values;

    std::string to_csv() const;
};

// Pearson coefficients between every column pair.
CorrelationMatrix pearson_matrix(const Eigen::MatrixXd& data, const std::vector<std::string>& codes);

// Agglomerative merge tree (average linkage on distance 1 - corr) with the
// in-order leaf walk. Leaves are 0..d-1; merge i creates node d+i.
struct ClusterOrdering {
    struct Merge {
        int left;
        int right;
        double height;
    };
    std::vector<Merge> merges;
    std::vector<int> leaf_order;
};

ClusterOrdering cluster_order(const CorrelationMatrix& corr);

// Codes ranked by signed correlation with the target, descending, target
// itself omitted, ties broken lexicographically.
std::vector<std::pair<std::string, double>> sort_by_target(const CorrelationMatrix& corr, const std::string& target);

struct AdResult {
    double statistic_a2 = 0.0;  // tie-adjusted (midrank) k-sample statistic
    double standardized_t = 0.0;
    double p_value = 1.0;
    int k = 0;
    int n_total = 0;
    bool extrapolated = false;  // p clamped at a tabulated endpoint
};

// Tie-adjusted k-sample Anderson-Darling test with the asymptotic p-value
// interpolated across the published critical points; p is clamped to
// [0.001, 0.25].
AdResult ad_ksamp(const std::vector<std::vector<double>>& groups);

struct ScreeningReport {
    std::vector<std::string> retained;
    std::vector<std::pair<std::string, double>> rejected;  // code, p_value
    std::vector<std::pair<std::string, double>> correlation_rank;
    std::vector<std::pair<std::string, double>> p_values;  // every candidate

    std::string to_json() const;
};

// Seeded train/test row split; a variable is retained when the two halves
// pass the distribution check at level alpha (p >= alpha).
ScreeningReport screen_variables(const LaggedDataset& data, double split = 0.8, double alpha = 0.1,
                                 std::uint64_t seed = 0);

}  // namespace causalkit
