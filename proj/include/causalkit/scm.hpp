#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "causalkit/dag.hpp"

namespace causalkit {

enum class MechanismFamily { Linear, Polynomial, Tanh, SinMix };

std::string family_name(MechanismFamily family);
MechanismFamily family_from_name(const std::string& name);

// Additive mechanism over the node's parents: f(x) = sum_p term(c_p, x_p),
// one coefficient per parent, term shape fixed by the family.
struct MechanismSpec {
    MechanismFamily family = MechanismFamily::Tanh;
    std::vector<int> parents;
    std::vector<double> coefficients;

    double eval(const Eigen::VectorXd& x) const;
    double d1(const Eigen::VectorXd& x, int parent_pos) const;
    double d2(const Eigen::VectorXd& x, int parent_pos) const;
};

// Synthetic additive-noise model with Gaussian noise and a known graph.
struct Scm {
    Dag dag;
    std::vector<MechanismSpec> mechanisms;
    std::vector<double> noise_sigmas;

    std::string to_json() const;
    static Scm from_json(const std::string& text);
};

// Uniform-permutation DAG with each order-compatible edge kept with
// probability edge_prob.
Dag random_dag(int d, double edge_prob, std::uint64_t seed);

Dag chain_dag(int d);

// Coefficients from [-2,-0.5] u [0.5,2]; noise sigmas from [0.2, 0.5];
// root nodes get sigma 1 so roots are standard normal.
Scm random_scm(const Dag& dag, MechanismFamily family, std::uint64_t seed);

// Ancestral sampling in topological order, n rows.
Eigen::MatrixXd sample(const Scm& scm, int n, std::uint64_t seed);

// Exact score s(x) = grad log p(x).
Eigen::VectorXd analytic_score(const Scm& scm, const Eigen::VectorXd& x);

// Exact diagonal of the score Jacobian, d s_j / d x_j. Constant -1/sigma_j^2
// at every leaf j.
Eigen::VectorXd analytic_jac_diag(const Scm& scm, const Eigen::VectorXd& x);

}  // namespace causalkit
