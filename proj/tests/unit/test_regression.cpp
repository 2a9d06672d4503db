#include <doctest.h>

#include <cmath>
#include <random>

#include "surfpde/errors.hpp"
#include "surfpde/regression.hpp"

using namespace surfpde;

namespace {

RegressionProblem random_problem(std::mt19937_64& rng, Eigen::Index m, Eigen::Index n, double mu) {
    std::normal_distribution<double> n01;
    RegressionProblem p;
    p.design.resize(m, n);
    p.target.resize(m);
    for (Eigen::Index i = 0; i < p.design.size(); ++i) p.design.data()[i] = n01(rng);
    Vector truth = Vector::Zero(n);
    for (Eigen::Index j = 0; j < n; j += 3) truth[j] = n01(rng);
    p.target = p.design * truth;
    for (Eigen::Index i = 0; i < m; ++i) p.target[i] += 0.1 * n01(rng);
    p.mu = mu;
    return p;
}

double soft(double v, double t) { return v > t ? v - t : (v < -t ? v + t : 0.0); }

}  // namespace

TEST_CASE("coordinate descent agrees with the QP oracle on random problems") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> mu_dist(0.01, 20.0);
    for (int trial = 0; trial < 25; ++trial) {
        const Eigen::Index m = 20 + trial, n = 4 + trial % 12;
        RegressionProblem p = random_problem(rng, m, n, mu_dist(rng));
        const double tol = 1e-12;
        const SparseSolution cd = lasso(p, tol);
        const SparseSolution qp = lasso_qp_oracle(p, tol);
        CHECK(cd.converged);
        CHECK(cd.objective_increases == 0);
        CHECK(std::abs(cd.objective - qp.objective) <= 1e-6 * std::max(1.0, std::abs(qp.objective)));
        CHECK(cd.kkt_residual <= 10.0 * tol * std::max(1.0, p.design.norm() * p.target.norm()));
        CHECK(kkt_check(p, cd.xi) == doctest::Approx(cd.kkt_residual));
    }
}

TEST_CASE("orthonormal design has the soft-threshold closed form") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n01;
    Matrix g(30, 8);
    for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = n01(rng);
    const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ() * Matrix::Identity(30, 8);
    Vector b(30);
    for (Eigen::Index i = 0; i < 30; ++i) b[i] = n01(rng);
    for (double mu : {0.0, 0.3, 1.0, 3.0}) {
        const SparseSolution s = lasso(RegressionProblem{q, b, mu, false});
        const Vector c = q.transpose() * b;
        for (Eigen::Index j = 0; j < 8; ++j) CHECK(std::abs(s.xi[j] - soft(c[j], mu / 2.0)) < 1e-10);
        const SparseSolution o = lasso_qp_oracle(RegressionProblem{q, b, mu, false});
        for (Eigen::Index j = 0; j < 8; ++j) CHECK(std::abs(o.xi[j] - soft(c[j], mu / 2.0)) < 1e-10);
    }
}

TEST_CASE("mu = 0 reduces to least squares") {
    std::mt19937_64 rng(9);
    RegressionProblem p = random_problem(rng, 40, 6, 0.0);
    const SparseSolution s = lasso(p);
    const Vector ls = least_squares(p.design, p.target);
    CHECK((s.xi - ls).norm() < 1e-10 * ls.norm());
}

TEST_CASE("column scales do not change the unnormalised solution") {
    // The raw objective is invariant under xi_j -> xi_j / s_j, A_j -> s_j A_j
    // combined with a penalty mu / s_j; a huge column still gets a finite,
    // reproducible answer.
    std::mt19937_64 rng(13);
    RegressionProblem p = random_problem(rng, 50, 5, 0.5);
    const SparseSolution base = lasso(p);
    RegressionProblem scaled = p;
    scaled.design.col(2) *= 1e120;
    const SparseSolution big = lasso(scaled);
    CHECK(big.xi.allFinite());
    // with column 2 effectively unpenalised the fit matches a moderate scaling
    RegressionProblem moderate = p;
    moderate.design.col(2) *= 1e8;
    const SparseSolution mid = lasso(moderate);
    CHECK((scaled.design * big.xi - moderate.design * mid.xi).norm() < 1e-6 * p.target.norm());
    CHECK(big.objective <= base.objective + 1e-8);
}

TEST_CASE("normalised columns solve in the scaled basis") {
    std::mt19937_64 rng(21);
    RegressionProblem p = random_problem(rng, 30, 6, 1.0);
    Vector s(6);
    for (Eigen::Index j = 0; j < 6; ++j) s[j] = p.design.col(j).norm();
    RegressionProblem manual{p.design * s.cwiseInverse().asDiagonal(), p.target, 1.0, false};
    p.normalize_columns = true;
    const SparseSolution a = lasso(p);
    const SparseSolution b = lasso(manual);
    CHECK((a.xi - b.xi.cwiseQuotient(s)).norm() < 1e-10);
}

TEST_CASE("QP oracle refuses large problems") {
    RegressionProblem p{Matrix::Ones(70, 65), Vector::Ones(70), 1.0, false};
    try {
        lasso_qp_oracle(p);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::oracle_scale_exceeded);
    }
}

TEST_CASE("square-root LASSO default penalty and optimality") {
    // Q(1 - 0.05/(2n)) via the complementary error function
    const double mu = sqrt_lasso_default_mu(100, 10);
    const double q = mu * std::sqrt(100.0) / 1.1;
    CHECK(0.5 * std::erfc(q / std::sqrt(2.0)) == doctest::Approx(0.05 / 20.0).epsilon(1e-10));

    std::mt19937_64 rng(17);
    RegressionProblem p = random_problem(rng, 60, 8, 0.0);
    p.mu.reset();
    const SparseSolution s = sqrt_lasso(p);
    CHECK(s.converged);
    CHECK(s.mu == doctest::Approx(sqrt_lasso_default_mu(60, 8)));
    CHECK(s.kkt_residual < 1e-6);
    // objective is no larger than at small perturbations of the solution
    const auto obj = [&](const Vector& xi) { return (p.design * xi - p.target).norm() + s.mu * xi.lpNorm<1>(); };
    for (Eigen::Index j = 0; j < 8; ++j) {
        for (double h : {1e-4, -1e-4}) {
            Vector x = s.xi;
            x[j] += h;
            CHECK(obj(x) >= obj(s.xi) - 1e-12);
        }
    }
}

TEST_CASE("square-root LASSO refuses exact fits") {
    Matrix a = Matrix::Identity(5, 5);
    Vector b = Vector::Ones(5);
    try {
        sqrt_lasso(RegressionProblem{a, b, 1e-6, false});
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::exact_fit);
    }
}

TEST_CASE("threshold and refit") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n01;
    Matrix a(50, 4);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = n01(rng);
    const Vector b = a * Eigen::Vector4d(2.0, 0.0, -1.0, 0.0);
    RegressionProblem p{a, b, 0.0, false};
    SparseSolution s;
    s.xi = Eigen::Vector4d(1.9, 1e-7, -1.1, 0.3);
    const SparseSolution r = threshold_and_refit(p, s, 1e-4);
    CHECK(r.support == std::vector<int>{0, 2, 3});
    CHECK(r.xi[0] == doctest::Approx(2.0));
    CHECK(r.xi[3] == doctest::Approx(0.0).scale(1.0));
    s.xi.setZero();
    CHECK_THROWS_AS(threshold_and_refit(p, s, 1e-4), Error);
}
