#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "causalkit/errors.hpp"
#include "causalkit/scm.hpp"
#include "oracles.hpp"

using namespace causalkit;

TEST_CASE("random_dag edge probability boundaries") {
    CHECK(random_dag(6, 0.0, 1).edge_count() == 0);
    CHECK(random_dag(6, 1.0, 1).edge_count() == 15);
    for (int seed = 0; seed < 20; ++seed) CHECK(random_dag(8, 0.3, seed).is_acyclic());
}

TEST_CASE("random_dag mean edge count matches the binomial expectation") {
    double total = 0.0;
    for (int seed = 0; seed < 1000; ++seed) total += random_dag(10, 2.0 / 9.0, seed).edge_count();
    CHECK(total / 1000.0 == doctest::Approx(10.0).epsilon(0.1));
}

TEST_CASE("random_scm structure and determinism") {
    Dag empty({"X0", "X1"});
    Scm noise_only = random_scm(empty, MechanismFamily::Tanh, 3);
    CHECK(noise_only.mechanisms[0].parents.empty());
    CHECK(noise_only.noise_sigmas[0] == 1.0);  // roots are standard normal

    Scm chain = random_scm(chain_dag(4), MechanismFamily::Tanh, 5);
    for (int v = 1; v < 4; ++v) {
        CHECK(chain.mechanisms[v].parents == std::vector<int>{v - 1});
        double c = chain.mechanisms[v].coefficients[0];
        CHECK(std::abs(c) >= 0.5);
        CHECK(std::abs(c) <= 2.0);
        CHECK(chain.noise_sigmas[v] >= 0.2);
        CHECK(chain.noise_sigmas[v] <= 0.5);
    }

    Scm again = random_scm(chain_dag(4), MechanismFamily::Tanh, 5);
    CHECK(again.mechanisms[2].coefficients == chain.mechanisms[2].coefficients);
    CHECK(sample(chain, 50, 9) == sample(chain, 50, 9));
}

TEST_CASE("sampling a linear chain reproduces the analytic covariance") {
    Dag dag = chain_dag(2);
    Scm scm;
    scm.dag = dag;
    scm.mechanisms = {{MechanismFamily::Linear, {}, {}}, {MechanismFamily::Linear, {0}, {1.0}}};
    scm.noise_sigmas = {1.0, 1.0};
    Eigen::MatrixXd data = sample(scm, 10000, 42);
    Eigen::MatrixXd centered = data.rowwise() - data.colwise().mean();
    Eigen::MatrixXd cov = centered.transpose() * centered / 10000.0;
    CHECK(cov(0, 0) == doctest::Approx(1.0).epsilon(0.1));
    CHECK(cov(0, 1) == doctest::Approx(1.0).epsilon(0.1));
    CHECK(cov(1, 1) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("pure-noise samples pass mean and variance sanity") {
    Dag empty({"X0", "X1"});
    Scm scm = random_scm(empty, MechanismFamily::Tanh, 7);
    Eigen::MatrixXd data = sample(scm, 10000, 11);
    for (int c = 0; c < 2; ++c) {
        CHECK(std::abs(data.col(c).mean()) < 0.05);
        double var = (data.col(c).array() - data.col(c).mean()).square().sum() / 10000.0;
        CHECK(std::abs(var - 1.0) < 0.05);
    }
}

TEST_CASE("standard normal score is -x") {
    Dag empty({"X0", "X1", "X2"});
    Scm scm = random_scm(empty, MechanismFamily::Tanh, 1);
    Eigen::VectorXd x(3);
    x << 0.3, -1.2, 2.0;
    CHECK((analytic_score(scm, x) + x).norm() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("chain score matches the hand-derived expression") {
    Scm scm;
    scm.dag = chain_dag(2);
    scm.mechanisms = {{MechanismFamily::Tanh, {}, {}}, {MechanismFamily::Tanh, {0}, {1.7}}};
    scm.noise_sigmas = {1.0, 0.3};
    Eigen::VectorXd x(2);
    x << 0.4, -0.2;
    double f = std::tanh(1.7 * 0.4);
    double fp = 1.7 * (1.0 - f * f);
    double residual = -0.2 - f;
    Eigen::VectorXd score = analytic_score(scm, x);
    CHECK(score(0) == doctest::Approx(-0.4 + fp * residual / 0.09).epsilon(1e-12));
    CHECK(score(1) == doctest::Approx(-residual / 0.09).epsilon(1e-12));
}

TEST_CASE("analytic score agrees with finite differences on random scms") {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        Dag dag = random_dag(4, 0.5, rng());
        auto family = trial % 2 == 0 ? MechanismFamily::Tanh : MechanismFamily::SinMix;
        Scm scm = random_scm(dag, family, rng());
        Eigen::VectorXd x(4);
        for (int a = 0; a < 4; ++a) x(a) = gauss(rng);
        Eigen::VectorXd exact = analytic_score(scm, x);
        Eigen::VectorXd fd = oracles::fd_score(scm, x);
        CHECK((exact - fd).cwiseAbs().maxCoeff() < 1e-5);
    }
}

TEST_CASE("analytic jacobian diagonal agrees with finite differences") {
    std::mt19937_64 rng(78);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        Scm scm = random_scm(random_dag(4, 0.5, rng()), MechanismFamily::Tanh, rng());
        Eigen::VectorXd x(4);
        for (int a = 0; a < 4; ++a) x(a) = gauss(rng);
        Eigen::VectorXd exact = analytic_jac_diag(scm, x);
        Eigen::VectorXd fd = oracles::fd_jac_diag(scm, x);
        CHECK((exact - fd).cwiseAbs().maxCoeff() < 1e-4);
    }
}

TEST_CASE("leaf jacobian diagonal is the constant -1/sigma^2") {
    std::mt19937_64 rng(79);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Scm scm = random_scm(chain_dag(3), MechanismFamily::Tanh, 13);
    double expected = -1.0 / (scm.noise_sigmas[2] * scm.noise_sigmas[2]);
    Eigen::VectorXd values(1000);
    Eigen::VectorXd parent_values(1000);
    for (int r = 0; r < 1000; ++r) {
        Eigen::VectorXd x(3);
        for (int a = 0; a < 3; ++a) x(a) = gauss(rng);
        Eigen::VectorXd jac = analytic_jac_diag(scm, x);
        values(r) = jac(2);
        parent_values(r) = jac(1);
    }
    // Leaf criterion: zero variance, exactly -1/sigma^2.
    CHECK((values.array() - expected).abs().maxCoeff() < 1e-12);
    // Parent criterion: variance bounded away from zero.
    double mean = parent_values.mean();
    CHECK((parent_values.array() - mean).square().sum() / 999.0 > 0.01);
}

TEST_CASE("scm json round trip") {
    Scm scm = random_scm(random_dag(5, 0.4, 21), MechanismFamily::SinMix, 22);
    Scm back = Scm::from_json(scm.to_json());
    CHECK(back.dag.adjacency == scm.dag.adjacency);
    CHECK(back.noise_sigmas == scm.noise_sigmas);
    CHECK(back.mechanisms[3].coefficients == scm.mechanisms[3].coefficients);
    CHECK(sample(back, 20, 3) == sample(scm, 20, 3));
}
