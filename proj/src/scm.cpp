#include "causalkit/scm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <json.hpp>

#include "causalkit/errors.hpp"

namespace causalkit {

std::string family_name(MechanismFamily family) {
    switch (family) {
        case MechanismFamily::Linear: return "linear";
        case MechanismFamily::Polynomial: return "polynomial";
        case MechanismFamily::Tanh: return "tanh";
        case MechanismFamily::SinMix: return "sin-mix";
    }
    throw ContractError("unknown mechanism family");
}

MechanismFamily family_from_name(const std::string& name) {
    if (name == "linear") return MechanismFamily::Linear;
    if (name == "polynomial") return MechanismFamily::Polynomial;
    if (name == "tanh") return MechanismFamily::Tanh;
    if (name == "sin-mix") return MechanismFamily::SinMix;
    throw ConfigError("unknown mechanism family: " + name);
}

namespace {

double term_value(MechanismFamily family, double c, double x) {
    switch (family) {
        case MechanismFamily::Linear: return c * x;
        case MechanismFamily::Polynomial: return 0.5 * c * x * x;
        case MechanismFamily::Tanh: return std::tanh(c * x);
        case MechanismFamily::SinMix: return std::sin(c * x) + 0.1 * c * x;
    }
    throw ContractError("unknown mechanism family");
}

double term_d1(MechanismFamily family, double c, double x) {
    switch (family) {
        case MechanismFamily::Linear: return c;
        case MechanismFamily::Polynomial: return c * x;
        case MechanismFamily::Tanh: {
            double t = std::tanh(c * x);
            return c * (1.0 - t * t);
        }
        case MechanismFamily::SinMix: return c * std::cos(c * x) + 0.1 * c;
    }
    throw ContractError("unknown mechanism family");
}

double term_d2(MechanismFamily family, double c, double x) {
    switch (family) {
        case MechanismFamily::Linear: return 0.0;
        case MechanismFamily::Polynomial: return c;
        case MechanismFamily::Tanh: {
            double t = std::tanh(c * x);
            return -2.0 * c * c * t * (1.0 - t * t);
        }
        case MechanismFamily::SinMix: return -c * c * std::sin(c * x);
    }
    throw ContractError("unknown mechanism family");
}

}  // namespace

double MechanismSpec::eval(const Eigen::VectorXd& x) const {
    double value = 0.0;
    for (size_t p = 0; p < parents.size(); ++p) value += term_value(family, coefficients[p], x(parents[p]));
    return value;
}

double MechanismSpec::d1(const Eigen::VectorXd& x, int parent_pos) const {
    return term_d1(family, coefficients[parent_pos], x(parents[parent_pos]));
}

double MechanismSpec::d2(const Eigen::VectorXd& x, int parent_pos) const {
    return term_d2(family, coefficients[parent_pos], x(parents[parent_pos]));
}

Dag random_dag(int d, double edge_prob, std::uint64_t seed) {
    if (d < 1) throw ContractError("random_dag requires d >= 1");
    if (edge_prob < 0.0 || edge_prob > 1.0) throw ContractError("edge_prob must lie in [0, 1]");
    std::mt19937_64 rng(seed);
    std::vector<int> perm(d);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::string> codes;
    for (int v = 0; v < d; ++v) codes.push_back("X" + std::to_string(v));
    Dag dag(std::move(codes));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int a = 0; a < d; ++a)
        for (int b = a + 1; b < d; ++b)
            if (unif(rng) < edge_prob) dag.add_edge(perm[a], perm[b]);
    return dag;
}

Dag chain_dag(int d) {
    std::vector<std::string> codes;
    for (int v = 0; v < d; ++v) codes.push_back("X" + std::to_string(v));
    Dag dag(std::move(codes));
    for (int v = 0; v + 1 < d; ++v) dag.add_edge(v, v + 1);
    return dag;
}

Scm random_scm(const Dag& dag, MechanismFamily family, std::uint64_t seed) {
    if (!dag.is_acyclic()) throw ContractError("random_scm requires an acyclic graph");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> magnitude(0.5, 2.0);
    std::uniform_real_distribution<double> sigma_dist(0.2, 0.5);
    std::bernoulli_distribution flip(0.5);
    Scm scm;
    scm.dag = dag;
    for (int v = 0; v < dag.size(); ++v) {
        MechanismSpec mech;
        mech.family = family;
        mech.parents = dag.parents(v);
        for (size_t p = 0; p < mech.parents.size(); ++p) {
            double c = magnitude(rng);
            mech.coefficients.push_back(flip(rng) ? -c : c);
        }
        scm.mechanisms.push_back(std::move(mech));
        scm.noise_sigmas.push_back(scm.mechanisms.back().parents.empty() ? 1.0 : sigma_dist(rng));
    }
    return scm;
}

Eigen::MatrixXd sample(const Scm& scm, int n, std::uint64_t seed) {
    if (n < 1) throw ContractError("sample requires n >= 1");
    auto topo = scm.dag.topological_sort();
    if (!topo) throw ContractError("scm graph is cyclic");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    int d = scm.dag.size();
    Eigen::MatrixXd data(n, d);
    Eigen::VectorXd row(d);
    for (int r = 0; r < n; ++r) {
        for (int v : *topo) row(v) = scm.mechanisms[v].eval(row) + scm.noise_sigmas[v] * gauss(rng);
        data.row(r) = row;
    }
    return data;
}

Eigen::VectorXd analytic_score(const Scm& scm, const Eigen::VectorXd& x) {
    int d = scm.dag.size();
    Eigen::VectorXd residual(d), score(d);
    for (int v = 0; v < d; ++v) residual(v) = x(v) - scm.mechanisms[v].eval(x);
    for (int a = 0; a < d; ++a) {
        double s = -residual(a) / (scm.noise_sigmas[a] * scm.noise_sigmas[a]);
        for (int c = 0; c < d; ++c) {
            const MechanismSpec& mech = scm.mechanisms[c];
            for (size_t p = 0; p < mech.parents.size(); ++p) {
                if (mech.parents[p] != a) continue;
                s += residual(c) / (scm.noise_sigmas[c] * scm.noise_sigmas[c]) * mech.d1(x, static_cast<int>(p));
            }
        }
        score(a) = s;
    }
    return score;
}

Eigen::VectorXd analytic_jac_diag(const Scm& scm, const Eigen::VectorXd& x) {
    int d = scm.dag.size();
    Eigen::VectorXd residual(d), jac(d);
    for (int v = 0; v < d; ++v) residual(v) = x(v) - scm.mechanisms[v].eval(x);
    for (int a = 0; a < d; ++a) {
        double j = -1.0 / (scm.noise_sigmas[a] * scm.noise_sigmas[a]);
        for (int c = 0; c < d; ++c) {
            const MechanismSpec& mech = scm.mechanisms[c];
            for (size_t p = 0; p < mech.parents.size(); ++p) {
                if (mech.parents[p] != a) continue;
                double inv_var = 1.0 / (scm.noise_sigmas[c] * scm.noise_sigmas[c]);
                double g1 = mech.d1(x, static_cast<int>(p));
                j += residual(c) * inv_var * mech.d2(x, static_cast<int>(p)) - g1 * g1 * inv_var;
            }
        }
        jac(a) = j;
    }
    return jac;
}

std::string Scm::to_json() const {
    nlohmann::json doc;
    doc["codes"] = dag.codes;
    std::vector<std::vector<int>> adjacency(dag.size());
    for (int i = 0; i < dag.size(); ++i)
        for (int j = 0; j < dag.size(); ++j) adjacency[i].push_back(dag.adjacency(i, j));
    doc["adjacency"] = adjacency;
    nlohmann::json mechs = nlohmann::json::array();
    for (const auto& mech : mechanisms) {
        mechs.push_back({{"family", family_name(mech.family)}, {"parents", mech.parents}, {"coefficients", mech.coefficients}});
    }
    doc["mechanisms"] = mechs;
    doc["noise_sigmas"] = noise_sigmas;
    return doc.dump(2);
}

Scm Scm::from_json(const std::string& text) {
    nlohmann::json doc = nlohmann::json::parse(text);
    Scm scm;
    scm.dag = Dag(doc.at("codes").get<std::vector<std::string>>());
    auto adjacency = doc.at("adjacency").get<std::vector<std::vector<int>>>();
    for (int i = 0; i < scm.dag.size(); ++i)
        for (int j = 0; j < scm.dag.size(); ++j)
            if (adjacency.at(i).at(j)) scm.dag.add_edge(i, j);
    for (const auto& mech : doc.at("mechanisms")) {
        MechanismSpec spec;
        spec.family = family_from_name(mech.at("family").get<std::string>());
        spec.parents = mech.at("parents").get<std::vector<int>>();
        spec.coefficients = mech.at("coefficients").get<std::vector<double>>();
        scm.mechanisms.push_back(std::move(spec));
    }
    scm.noise_sigmas = doc.at("noise_sigmas").get<std::vector<double>>();
    return scm;
}

}  // namespace causalkit
