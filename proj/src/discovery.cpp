#include "causalkit/discovery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/fisher_f.hpp>
#include <json.hpp>

#include "causalkit/errors.hpp"

namespace causalkit {

int find_leaf(const Eigen::MatrixXd& data, const KernelConfig& cfg) {
    if (data.cols() < 1) throw ContractError("find_leaf requires at least one column");
    if (data.cols() == 1) return 0;
    Eigen::VectorXd variances = diag_variance(jacobian_diag(data, cfg));
    int best = 0;
    for (int c = 1; c < variances.size(); ++c)
        if (variances(c) < variances(best)) best = c;
    return best;
}

namespace {

// Shared state for the ordering dynamic program: standardized data, the
// per-covariate polynomial basis, and cross-product blocks so that the RSS
// of any (node | parent set) regression reduces to a small SPD solve.
class OrderProgram {
public:
    OrderProgram(const Eigen::MatrixXd& data, int degree) : d_(static_cast<int>(data.cols())), degree_(degree) {
        Eigen::Index n = data.rows();
        z_.resize(n, d_);
        for (int c = 0; c < d_; ++c) {
            double mean = data.col(c).mean();
            double sd = std::sqrt((data.col(c).array() - mean).square().sum() / n);
            if (sd <= 0.0) throw DegenerateDataError("constant column " + std::to_string(c) + " in ordering input");
            z_.col(c) = (data.col(c).array() - mean) / sd;
        }
        Eigen::MatrixXd basis(n, 1 + d_ * degree_);
        basis.col(0).setOnes();
        for (int c = 0; c < d_; ++c) {
            Eigen::VectorXd power = z_.col(c);
            for (int p = 0; p < degree_; ++p) {
                basis.col(1 + c * degree_ + p) = power;
                power = power.cwiseProduct(z_.col(c));
            }
        }
        gram_ = basis.transpose() * basis;
        cross_ = basis.transpose() * z_;
        yty_ = z_.colwise().squaredNorm();
    }

    // log of mean squared residual of z_j regressed on the intercept plus
    // the basis blocks of the parent set.
    double log_rss(int j, const std::vector<int>& parents) const {
        int cols = 1 + static_cast<int>(parents.size()) * degree_;
        std::vector<int> idx;
        idx.reserve(cols);
        idx.push_back(0);
        for (int a : parents)
            for (int p = 0; p < degree_; ++p) idx.push_back(1 + a * degree_ + p);
        Eigen::MatrixXd g(cols, cols);
        Eigen::VectorXd b(cols);
        for (int r = 0; r < cols; ++r) {
            b(r) = cross_(idx[r], j);
            for (int c = 0; c < cols; ++c) g(r, c) = gram_(idx[r], idx[c]);
        }
        // Tiny ridge keeps collinear bases (duplicated columns) solvable.
        g.diagonal().array() += 1e-9 * z_.rows();
        Eigen::VectorXd beta = Eigen::LDLT<Eigen::MatrixXd>(g).solve(b);
        double rss = yty_(j) - 2.0 * beta.dot(b) + beta.dot(g * beta);
        return std::log(std::max(rss / z_.rows(), 1e-300));
    }

    int size() const { return d_; }

private:
    int d_;
    int degree_;
    Eigen::MatrixXd z_;
    Eigen::MatrixXd gram_;
    Eigen::MatrixXd cross_;
    Eigen::VectorXd yty_;
};

std::vector<int> mask_members(unsigned mask, int d) {
    std::vector<int> out;
    for (int v = 0; v < d; ++v)
        if (mask >> v & 1u) out.push_back(v);
    return out;
}

}  // namespace

TopologicalOrder topological_order(const Eigen::MatrixXd& data, const OrderConfig& cfg) {
    int d = static_cast<int>(data.cols());
    if (d < 1) throw ContractError("topological_order requires at least one column");
    if (cfg.basis_degree < 1) throw ConfigError("basis_degree must be positive");
    if (d > 24) throw ConfigError("ordering search supports at most 24 variables");

    TopologicalOrder result;
    if (d == 1) {
        result.order = {0};
        result.leaf_trace.push_back({0, Eigen::VectorXd::Zero(1)});
        return result;
    }

    OrderProgram program(data, cfg.basis_degree);

    // cost[S] = cheapest total log-RSS of reducing the active set S to
    // nothing by leaf removals; choice[S] = the leaf removed first from S.
    unsigned full = (1u << d) - 1u;
    std::vector<double> cost(full + 1, std::numeric_limits<double>::infinity());
    std::vector<signed char> choice(full + 1, -1);
    cost[0] = 0.0;
    for (unsigned s = 1; s <= full; ++s) {
        for (int j = 0; j < d; ++j) {
            if (!(s >> j & 1u)) continue;
            unsigned rest = s & ~(1u << j);
            double c = cost[rest] + program.log_rss(j, mask_members(rest, d));
            if (c < cost[s]) {
                cost[s] = c;
                choice[s] = static_cast<signed char>(j);
            }
        }
    }

    // Backtrack leaf-most first, recording every candidate's marginal
    // removal cost at each step.
    std::vector<int> removal;
    for (unsigned s = full; s != 0;) {
        std::vector<int> active = mask_members(s, d);
        Eigen::VectorXd stats(active.size());
        for (size_t a = 0; a < active.size(); ++a) {
            unsigned rest = s & ~(1u << active[a]);
            stats(a) = cost[rest] + program.log_rss(active[a], mask_members(rest, d));
        }
        int leaf = choice[s];
        removal.push_back(leaf);
        result.leaf_trace.push_back({leaf, std::move(stats)});
        s &= ~(1u << leaf);
    }
    result.order.assign(removal.rbegin(), removal.rend());
    return result;
}

Dag full_dag_from_order(const TopologicalOrder& order, const std::vector<std::string>& codes) {
    if (codes.size() != order.order.size()) throw ContractError("code count must match order length");
    Dag dag(codes);
    for (size_t a = 0; a < order.order.size(); ++a)
        for (size_t b = a + 1; b < order.order.size(); ++b) dag.add_edge(order.order[a], order.order[b]);
    return dag;
}

namespace {

// Basis columns for one covariate. Polynomial: powers 1..size. Spline:
// powers 1..3 plus truncated cubics at interior quantile knots.
Eigen::MatrixXd covariate_basis(const Eigen::VectorXd& x, PruneBasis basis, int size) {
    Eigen::MatrixXd out(x.size(), size);
    if (basis == PruneBasis::Polynomial) {
        Eigen::VectorXd power = x;
        for (int p = 0; p < size; ++p) {
            out.col(p) = power;
            power = power.cwiseProduct(x);
        }
        return out;
    }
    int poly = std::min(size, 3);
    Eigen::VectorXd power = x;
    for (int p = 0; p < poly; ++p) {
        out.col(p) = power;
        power = power.cwiseProduct(x);
    }
    if (size > 3) {
        std::vector<double> sorted(x.data(), x.data() + x.size());
        std::sort(sorted.begin(), sorted.end());
        int knots = size - 3;
        for (int q = 0; q < knots; ++q) {
            double frac = static_cast<double>(q + 1) / (knots + 1);
            double knot = sorted[static_cast<size_t>(frac * (sorted.size() - 1))];
            out.col(3 + q) = (x.array() - knot).max(0.0).pow(3);
        }
    }
    return out;
}

struct Fit {
    double rss;
    int rank;
};

Fit least_squares_rss(const Eigen::MatrixXd& design, const Eigen::VectorXd& y) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    Eigen::VectorXd beta = qr.solve(y);
    double rss = (y - design * beta).squaredNorm();
    return {rss, static_cast<int>(qr.rank())};
}

Eigen::MatrixXd assemble_design(const std::vector<Eigen::MatrixXd>& blocks, int skip, Eigen::Index n) {
    int cols = 1;
    for (int b = 0; b < static_cast<int>(blocks.size()); ++b)
        if (b != skip) cols += static_cast<int>(blocks[b].cols());
    Eigen::MatrixXd design(n, cols);
    design.col(0).setOnes();
    int at = 1;
    for (int b = 0; b < static_cast<int>(blocks.size()); ++b) {
        if (b == skip) continue;
        design.middleCols(at, blocks[b].cols()) = blocks[b];
        at += static_cast<int>(blocks[b].cols());
    }
    return design;
}

}  // namespace

Dag cam_prune(const Dag& dag, const Eigen::MatrixXd& data, const PruneConfig& cfg,
              std::vector<std::tuple<int, int, double>>* edge_p_values) {
    if (cfg.significance_alpha <= 0.0 || cfg.significance_alpha > 1.0)
        throw ConfigError("significance_alpha must lie in (0, 1]");
    if (cfg.basis_size < 2) throw ConfigError("basis_size must be at least 2");
    if (static_cast<int>(data.cols()) != dag.size()) throw ContractError("data columns must align with dag nodes");

    Dag pruned = dag;
    for (int j = 0; j < dag.size(); ++j) {
        std::vector<int> parents = dag.parents(j);
        if (parents.empty()) continue;

        int full_cols = 1 + static_cast<int>(parents.size()) * cfg.basis_size;
        if (static_cast<int>(data.rows()) <= full_cols)
            throw ConfigError("too few rows for basis_size " + std::to_string(cfg.basis_size) + " with " +
                              std::to_string(parents.size()) + " parents");

        std::vector<Eigen::MatrixXd> blocks;
        for (int p : parents) blocks.push_back(covariate_basis(data.col(p), cfg.basis, cfg.basis_size));
        Eigen::VectorXd y = data.col(j);
        Fit full = least_squares_rss(assemble_design(blocks, -1, data.rows()), y);
        int dof = static_cast<int>(data.rows()) - full.rank;
        if (dof < 1) throw ConfigError("no residual degrees of freedom for node " + dag.codes[j]);

        for (size_t b = 0; b < parents.size(); ++b) {
            double p_value;
            Fit reduced = least_squares_rss(assemble_design(blocks, static_cast<int>(b), data.rows()), y);
            int q = full.rank - reduced.rank;
            if (q <= 0 || full.rss <= 0.0) {
                // Fully collinear block or an exact fit; no evidence either way.
                p_value = q <= 0 ? 1.0 : 0.0;
            } else {
                double f_stat = std::max(0.0, (reduced.rss - full.rss) / q / (full.rss / dof));
                boost::math::fisher_f_distribution<double> dist(q, dof);
                p_value = boost::math::cdf(boost::math::complement(dist, f_stat));
            }
            if (edge_p_values) edge_p_values->push_back({parents[b], j, p_value});
            if (cfg.significance_alpha >= 1.0) continue;  // reject-nothing boundary
            if (p_value >= cfg.significance_alpha) pruned.remove_edge(parents[b], j);
        }
    }
    return pruned;
}

DiscoveryResult discover_matrix(const Eigen::MatrixXd& data, const std::vector<std::string>& codes,
                                const KernelConfig& kernel_cfg, const PruneConfig& prune_cfg,
                                const OrderConfig& order_cfg) {
    DiscoveryResult result;
    result.order = topological_order(data, order_cfg);
    Dag full = full_dag_from_order(result.order, codes);
    result.dag = cam_prune(full, data, prune_cfg, &result.edge_p_values);
    result.score_var_diag = diag_variance(jacobian_diag(data, kernel_cfg));
    return result;
}

DiscoveryResult discover(const LaggedDataset& data, const KernelConfig& kernel_cfg, const PruneConfig& prune_cfg,
                         const OrderConfig& order_cfg) {
    std::vector<std::string> codes = data.variable_codes;
    codes.push_back(data.target_code);
    return discover_matrix(data.pooled_with_target(), codes, kernel_cfg, prune_cfg, order_cfg);
}

std::string DiscoveryResult::diagnostics_json() const {
    nlohmann::json doc;
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& [removed, stats] : order.leaf_trace) {
        std::vector<double> values(stats.data(), stats.data() + stats.size());
        trace.push_back({{"removed_index", removed}, {"removal_cost", values}});
    }
    doc["leaf_trace"] = std::move(trace);
    doc["order"] = order.order;
    doc["score_var_diag"] =
        std::vector<double>(score_var_diag.data(), score_var_diag.data() + score_var_diag.size());
    nlohmann::json pvals = nlohmann::json::array();
    for (const auto& [i, j, p] : edge_p_values)
        pvals.push_back({{"from", dag.codes.at(i)}, {"to", dag.codes.at(j)}, {"p_value", p}});
    doc["edge_p_values"] = std::move(pvals);
    return doc.dump(2);
}

}  // namespace causalkit
