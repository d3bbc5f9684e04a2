#pragma once

#include <Eigen/Dense>
#include <string>
#include <tuple>
#include <vector>

#include "causalkit/dag.hpp"
#include "causalkit/panel.hpp"
#include "causalkit/score.hpp"

namespace causalkit {

enum class PruneBasis { Polynomial, Spline };

struct PruneConfig {
    double significance_alpha = 0.001;
    PruneBasis basis = PruneBasis::Polynomial;
    int basis_size = 3;
};

// Ordering search settings. The order is the exact maximiser of the pooled
// additive-model Gaussian likelihood, found by dynamic programming over
// variable subsets: removing j from active set S costs log RSS(j | S \ j)
// under a per-covariate polynomial basis of the given degree. Cost grows as
// d * 2^d small solves; fine for d <= 20.
struct OrderConfig {
    int basis_degree = 5;
};

// Index of the variable whose Jacobian-diagonal variance is smallest;
// ties go to the smaller index.
int find_leaf(const Eigen::MatrixXd& data, const KernelConfig& cfg);

// Leaf-removal order by the exact likelihood dynamic program; order.front()
// is root-most. leaf_trace records, per removal step, the marginal removal
// cost of every then-active candidate.
TopologicalOrder topological_order(const Eigen::MatrixXd& data, const OrderConfig& cfg = {});

// The complete order-compatible DAG: edge i -> j iff i precedes j.
Dag full_dag_from_order(const TopologicalOrder& order, const std::vector<std::string>& codes);

// Additive-regression pruning: per node, fit the basis expansion over its
// candidate parents and keep an edge only when the per-covariate F-test is
// significant. Never adds an edge.
Dag cam_prune(const Dag& dag, const Eigen::MatrixXd& data, const PruneConfig& cfg,
              std::vector<std::tuple<int, int, double>>* edge_p_values = nullptr);

struct DiscoveryResult {
    TopologicalOrder order;
    Dag dag;
    std::vector<std::tuple<int, int, double>> edge_p_values;  // (i, j, p) for candidate edges
    Eigen::VectorXd score_var_diag;  // full-matrix Jacobian-diagonal variances (diagnostic)

    std::string diagnostics_json() const;
};

// Full pipeline over the pooled lag pairs with the target as final column.
DiscoveryResult discover(const LaggedDataset& data, const KernelConfig& kernel_cfg, const PruneConfig& prune_cfg,
                         const OrderConfig& order_cfg = {});

// Same pipeline over an explicit matrix with node codes (simulation entry
// point).
DiscoveryResult discover_matrix(const Eigen::MatrixXd& data, const std::vector<std::string>& codes,
                                const KernelConfig& kernel_cfg, const PruneConfig& prune_cfg,
                                const OrderConfig& order_cfg = {});

}  // namespace causalkit
