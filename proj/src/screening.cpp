#include "causalkit/screening.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "causalkit/errors.hpp"

namespace causalkit {

CorrelationMatrix pearson_matrix(const Eigen::MatrixXd& data, const std::vector<std::string>& codes) {
    Eigen::Index n = data.rows(), d = data.cols();
    if (n < 2) throw ContractError("pearson_matrix requires at least two rows");
    if (static_cast<Eigen::Index>(codes.size()) != d) throw ContractError("code count must match column count");
    auto [z, stats] = standardize(data, codes);
    (void)stats;
    Eigen::MatrixXd corr = (z.transpose() * z) / static_cast<double>(n);
    corr = ((corr + corr.transpose()) / 2.0).cwiseMin(1.0).cwiseMax(-1.0);
    corr.diagonal().setOnes();
    return {codes, corr};
}

std::string CorrelationMatrix::to_csv() const {
    std::ostringstream out;
    out.precision(17);
    out << "code";
    for (const auto& code : codes) out << ',' << code;
    out << '\n';
    for (size_t i = 0; i < codes.size(); ++i) {
        out << codes[i];
        for (size_t j = 0; j < codes.size(); ++j) out << ',' << values(i, j);
        out << '\n';
    }
    return out.str();
}

ClusterOrdering cluster_order(const CorrelationMatrix& corr) {
    int d = static_cast<int>(corr.codes.size());
    ClusterOrdering out;
    if (d < 2) {
        if (d == 1) out.leaf_order = {0};
        return out;
    }

    struct Cluster {
        int node;      // tree node id
        int min_leaf;  // deterministic tie-break key
        int size;
    };
    std::vector<Cluster> active;
    for (int i = 0; i < d; ++i) active.push_back({i, i, 1});
    // dist[a][b] between active clusters, average linkage.
    std::vector<std::vector<double>> dist(d, std::vector<double>(d, 0.0));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) dist[i][j] = 1.0 - corr.values(i, j);

    std::vector<std::pair<int, int>> children(d, {-1, -1});
    while (active.size() > 1) {
        size_t best_a = 0, best_b = 1;
        double best = dist[0][1];
        for (size_t a = 0; a < active.size(); ++a)
            for (size_t b = a + 1; b < active.size(); ++b)
                if (dist[a][b] < best - 1e-15) {
                    best = dist[a][b];
                    best_a = a;
                    best_b = b;
                }
        const Cluster& ca = active[best_a];
        const Cluster& cb = active[best_b];
        bool a_first = ca.min_leaf < cb.min_leaf;
        int node = d + static_cast<int>(out.merges.size());
        out.merges.push_back({a_first ? ca.node : cb.node, a_first ? cb.node : ca.node, best});
        children.push_back({out.merges.back().left, out.merges.back().right});
        Cluster merged{node, std::min(ca.min_leaf, cb.min_leaf), ca.size + cb.size};

        std::vector<double> merged_row;
        for (size_t x = 0; x < active.size(); ++x) {
            if (x == best_a || x == best_b) continue;
            merged_row.push_back((ca.size * dist[best_a][x] + cb.size * dist[best_b][x]) / (ca.size + cb.size));
        }
        // Drop b then a (b > a), append the merged cluster.
        auto drop = [&](size_t idx) {
            active.erase(active.begin() + idx);
            dist.erase(dist.begin() + idx);
            for (auto& row : dist) row.erase(row.begin() + idx);
        };
        drop(best_b);
        drop(best_a);
        active.push_back(merged);
        for (auto& row : dist) row.push_back(0.0);
        merged_row.push_back(0.0);
        dist.push_back(merged_row);
        for (size_t x = 0; x + 1 < dist.size(); ++x) dist[x][dist.size() - 1] = merged_row[x];
    }

    // In-order walk of the merge tree.
    std::vector<int> stack{active[0].node};
    while (!stack.empty()) {
        int node = stack.back();
        stack.pop_back();
        if (node < d) {
            out.leaf_order.push_back(node);
        } else {
            stack.push_back(children[node].second);
            stack.push_back(children[node].first);
        }
    }
    return out;
}

std::vector<std::pair<std::string, double>> sort_by_target(const CorrelationMatrix& corr, const std::string& target) {
    auto it = std::find(corr.codes.begin(), corr.codes.end(), target);
    if (it == corr.codes.end()) throw LookupError("target code not present in correlation matrix: " + target);
    size_t t = it - corr.codes.begin();
    std::vector<std::pair<std::string, double>> ranked;
    for (size_t i = 0; i < corr.codes.size(); ++i)
        if (i != t) ranked.push_back({corr.codes[i], corr.values(i, t)});
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return ranked;
}

namespace {

// Critical points of the standardized statistic at these significance
// levels, as functions of m = k - 1.
constexpr double kSigLevels[7] = {0.25, 0.10, 0.05, 0.025, 0.01, 0.005, 0.001};
constexpr double kB0[7] = {0.675, 1.281, 1.645, 1.960, 2.326, 2.573, 3.085};
constexpr double kB1[7] = {-0.245, 0.250, 0.678, 1.149, 1.822, 2.364, 3.615};
constexpr double kB2[7] = {-0.105, -0.305, -0.362, -0.391, -0.396, -0.345, -0.154};

}  // namespace

AdResult ad_ksamp(const std::vector<std::vector<double>>& groups) {
    int k = static_cast<int>(groups.size());
    if (k < 2) throw ContractError("ad_ksamp requires at least two groups");
    std::vector<double> pooled;
    for (const auto& group : groups) {
        if (group.size() < 2) throw ContractError("every group needs at least two observations");
        pooled.insert(pooled.end(), group.begin(), group.end());
    }
    int n_total = static_cast<int>(pooled.size());
    std::sort(pooled.begin(), pooled.end());
    std::vector<double> distinct;
    for (double v : pooled)
        if (distinct.empty() || v != distinct.back()) distinct.push_back(v);
    if (distinct.size() < 2) throw DegenerateDataError("pooled sample has fewer than two distinct values");

    const double big_n = n_total;
    int L = static_cast<int>(distinct.size());

    // Midrank (tie-adjusted) statistic.
    std::vector<double> lj(L), bj(L);
    for (int j = 0; j < L; ++j) {
        auto lo = std::lower_bound(pooled.begin(), pooled.end(), distinct[j]) - pooled.begin();
        auto hi = std::upper_bound(pooled.begin(), pooled.end(), distinct[j]) - pooled.begin();
        lj[j] = static_cast<double>(hi - lo);
        bj[j] = static_cast<double>(lo) + lj[j] / 2.0;
    }
    double a2 = 0.0;
    for (const auto& group : groups) {
        std::vector<double> sorted_group(group);
        std::sort(sorted_group.begin(), sorted_group.end());
        double ni = static_cast<double>(group.size());
        double inner_sum = 0.0;
        for (int j = 0; j < L; ++j) {
            auto lo = std::lower_bound(sorted_group.begin(), sorted_group.end(), distinct[j]) - sorted_group.begin();
            auto hi = std::upper_bound(sorted_group.begin(), sorted_group.end(), distinct[j]) - sorted_group.begin();
            double mij = static_cast<double>(hi) - static_cast<double>(hi - lo) / 2.0;
            double denom = bj[j] * (big_n - bj[j]) - big_n * lj[j] / 4.0;
            if (denom <= 0.0) continue;  // only at the extreme tied block
            double num = big_n * mij - bj[j] * ni;
            inner_sum += lj[j] / big_n * num * num / denom;
        }
        a2 += inner_sum / ni;
    }
    a2 *= (big_n - 1.0) / big_n;

    // Null variance of the statistic.
    double h_cap = 0.0;
    for (const auto& group : groups) h_cap += 1.0 / group.size();
    double h = 0.0;
    for (int j = 1; j <= n_total - 1; ++j) h += 1.0 / j;
    double g = 0.0;
    for (int i = 1; i <= n_total - 2; ++i) {
        double inner = 0.0;
        for (int j = i + 1; j <= n_total - 1; ++j) inner += 1.0 / j;
        g += inner / (big_n - i);
    }
    double kd = k;
    double a = (4.0 * g - 6.0) * (kd - 1.0) + (10.0 - 6.0 * g) * h_cap;
    double b = (2.0 * g - 4.0) * kd * kd + 8.0 * h * kd + (2.0 * g - 14.0 * h - 4.0) * h_cap - 8.0 * h + 4.0 * g - 6.0;
    double c = (6.0 * h + 2.0 * g - 2.0) * kd * kd + (4.0 * h - 4.0 * g + 6.0) * kd + (2.0 * h - 6.0) * h_cap + 4.0 * h;
    double d_coef = (2.0 * h + 6.0) * kd * kd - 4.0 * h * kd;
    double sigma_sq = (a * big_n * big_n * big_n + b * big_n * big_n + c * big_n + d_coef) /
                      ((big_n - 1.0) * (big_n - 2.0) * (big_n - 3.0));
    if (sigma_sq <= 0.0) throw NumericError("non-positive null variance in ad_ksamp");
    double m = kd - 1.0;
    double t = (a2 - m) / std::sqrt(sigma_sq);

    AdResult result;
    result.statistic_a2 = a2;
    result.standardized_t = t;
    result.k = k;
    result.n_total = n_total;

    double critical[7];
    for (int i = 0; i < 7; ++i) critical[i] = kB0[i] + kB1[i] / std::sqrt(m) + kB2[i] / m;
    if (t <= critical[0]) {
        result.p_value = kSigLevels[0];
        result.extrapolated = t < critical[0];
    } else if (t >= critical[6]) {
        result.p_value = kSigLevels[6];
        result.extrapolated = t > critical[6];
    } else {
        int seg = 0;
        while (t > critical[seg + 1]) ++seg;
        double w = (t - critical[seg]) / (critical[seg + 1] - critical[seg]);
        result.p_value = std::exp((1.0 - w) * std::log(kSigLevels[seg]) + w * std::log(kSigLevels[seg + 1]));
    }
    return result;
}

ScreeningReport screen_variables(const LaggedDataset& data, double split, double alpha, std::uint64_t seed) {
    if (split <= 0.0 || split >= 1.0) throw ContractError("split must lie in (0, 1)");
    if (alpha < 0.0 || alpha > 1.0) throw ContractError("alpha must lie in [0, 1]");
    Eigen::MatrixXd x = data.pooled_predictors();
    int n = static_cast<int>(x.rows());
    int n_train = static_cast<int>(std::floor(n * split));
    if (n_train < 2 || n - n_train < 2) throw ContractError("too few rows for the requested split");

    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);

    ScreeningReport report;
    for (int c = 0; c < static_cast<int>(data.variable_codes.size()); ++c) {
        std::vector<double> train, test;
        for (int r = 0; r < n; ++r) (r < n_train ? train : test).push_back(x(idx[r], c));
        AdResult ad = ad_ksamp({train, test});
        report.p_values.push_back({data.variable_codes[c], ad.p_value});
        if (ad.p_value >= alpha)
            report.retained.push_back(data.variable_codes[c]);
        else
            report.rejected.push_back({data.variable_codes[c], ad.p_value});
    }

    std::vector<std::string> codes = data.variable_codes;
    codes.push_back(data.target_code);
    report.correlation_rank = sort_by_target(pearson_matrix(data.pooled_with_target(), codes), data.target_code);
    return report;
}

std::string ScreeningReport::to_json() const {
    nlohmann::json doc;
    doc["retained"] = retained;
    nlohmann::json rej = nlohmann::json::array();
    for (const auto& [code, p] : rejected) rej.push_back({{"code", code}, {"p_value", p}});
    doc["rejected"] = std::move(rej);
    nlohmann::json rank = nlohmann::json::array();
    for (const auto& [code, corr] : correlation_rank) rank.push_back({{"code", code}, {"corr_with_target", corr}});
    doc["correlation_rank"] = std::move(rank);
    nlohmann::json pvals = nlohmann::json::array();
    for (const auto& [code, p] : p_values) pvals.push_back({{"code", code}, {"p_value", p}});
    doc["p_values"] = std::move(pvals);
    return doc.dump(2);
}

}  // namespace causalkit
