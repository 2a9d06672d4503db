#include <doctest.h>

#include <cmath>

#include "surfpde/errors.hpp"
#include "surfpde/fields.hpp"
#include "surfpde/solver.hpp"

using namespace surfpde;

namespace {

// Linear-or-polynomial model on the standard map with given term coefficients.
SparseModel make_model(ModelKind kind, int d, int ell, const std::vector<std::pair<std::string, double>>& coefs) {
    SparseModel m;
    m.kind = kind;
    m.map = FeatureMap::standard(d);
    m.ell = ell;
    m.terms = enumerate_terms(m.map, ell);
    m.coefficients = Vector::Zero(static_cast<Eigen::Index>(m.terms.size()));
    for (const auto& [label, c] : coefs) {
        bool found = false;
        for (size_t j = 0; j < m.terms.size(); ++j) {
            if (m.terms[j].label == label) {
                m.coefficients[static_cast<Eigen::Index>(j)] = c;
                found = true;
            }
        }
        REQUIRE(found);
    }
    m.raw_coefficients = m.coefficients;
    for (Eigen::Index j = 0; j < m.coefficients.size(); ++j) {
        if (m.coefficients[j] != 0.0) m.support.push_back(static_cast<int>(j));
    }
    return m;
}

}  // namespace

TEST_CASE("SBDF2 is second order on u' = -u") {
    const PointCloud cloud = analytic_normals(unit_circle(), circle_nodes(20));
    const DiscreteOperators ops(cloud, KernelSpec::matern(2, 4));
    const SparseModel model = make_model(ModelKind::evolution, 2, 1, {{"u", -1.0}});
    std::vector<double> err;
    std::vector<double> dts{0.01, 0.005, 0.0025, 0.00125};
    for (double dt : dts) {
        const int steps = static_cast<int>(std::lround(1.0 / dt));
        const EvolutionResult r = solve_evolution(model, ops, Vector::Ones(20), Matrix::Zero(steps + 1, 20), dt, steps);
        err.push_back(std::abs(r.trajectory(steps, 0) - std::exp(-1.0)));
        CHECK(r.factorizations == 2);
    }
    for (size_t k = 1; k < err.size(); ++k) {
        const double order = std::log(err[k - 1] / err[k]) / std::log(2.0);
        CHECK(order == doctest::Approx(2.0).epsilon(0.1));
    }
}

TEST_CASE("stationary discover-then-solve round trip with mu = 0") {
    const PointCloud cloud = analytic_normals(unit_sphere(), sphere_nodes(200));
    const DiscreteOperators ops(cloud, KernelSpec::matern(3, 4));
    const Vector u = sample_field(field_by_name("exp-sum", 3), cloud);
    // manufactured with the discrete operators: -Delta u + u = f
    const Vector f = -laplace_beltrami_nodal(ops, u) + u;
    RegressionConfig cfg;
    cfg.mu = 0.0;
    cfg.prune_rel_tol = 0.0;
    const SparseModel model = discover_stationary(ops, u, f, 1, cfg);
    for (Eigen::Index j = 0; j < model.coefficients.size(); ++j) {
        const std::string& label = model.terms[static_cast<size_t>(j)].label;
        const double want = label == "Δ_S u" ? -1.0 : (label == "u" ? 1.0 : 0.0);
        CHECK(std::abs(model.coefficients[j] - want) < 1e-8);
    }
    const StationaryResult s = solve_stationary(model, ops, f);
    CHECK((s.u - u).lpNorm<Eigen::Infinity>() < 1e-6 * u.lpNorm<Eigen::Infinity>());
}

TEST_CASE("Newton solves a nonlinear stationary model") {
    const PointCloud cloud = analytic_normals(unit_sphere(), sphere_nodes(150));
    const DiscreteOperators ops(cloud, KernelSpec::matern(3, 4));
    const SparseModel model = make_model(ModelKind::stationary, 3, 2, {{"Δ_S u", -1.0}, {"u", 1.0}, {"u²", 0.3}});
    const Vector u = sample_field(field_by_name("z", 3), cloud);
    const ModelOperator op(model, ops);
    const Vector f = op.apply(u);
    const Vector direct = -laplace_beltrami_nodal(ops, u) + u + 0.3 * u.cwiseProduct(u);
    CHECK((f - direct).lpNorm<Eigen::Infinity>() < 1e-12);
    // Jacobian against central differences
    const Matrix jac = op.jacobian(u);
    Vector dir = Vector::LinSpaced(150, -1.0, 1.0);
    const Vector fd = (op.apply(u + 1e-6 * dir) - op.apply(u - 1e-6 * dir)) / 2e-6;
    CHECK((jac * dir - fd).lpNorm<Eigen::Infinity>() < 1e-6 * fd.lpNorm<Eigen::Infinity>());
    const StationaryResult s = solve_stationary(model, ops, f);
    CHECK(s.newton_iterations >= 1);
    CHECK((s.u - u).lpNorm<Eigen::Infinity>() < 1e-8);
    CHECK(s.residual < 1e-9);
}

TEST_CASE("evolution discover-then-solve round trip with mu = 0") {
    const Surface surface = unit_sphere();
    const PointCloud cloud = analytic_normals(surface, sphere_nodes(200));
    const DiscreteOperators ops(cloud, KernelSpec::matern(3, 4));
    const SparseModel truth = make_model(ModelKind::evolution, 3, 2, {{"Δ_S u", 0.5}, {"u²", 0.125}});
    const Vector u0 = sample_field(field_by_name("exp-sum", 3), cloud);
    const int steps = 20;
    const double dt = 0.01;
    const Matrix forcing = Matrix::Zero(steps + 1, 200);
    const EvolutionResult run = solve_evolution(truth, ops, u0, forcing, dt, steps);

    Snapshots snaps;
    snaps.times = run.times;
    snaps.values = run.trajectory;
    snaps.forcing = forcing;
    snaps.dt = dt;
    RegressionConfig cfg;
    cfg.mu = 0.0;
    cfg.prune_rel_tol = 0.0;
    const SparseModel learned = discover_evolution(ops, snaps, 2, cfg);
    CHECK(std::abs(learned.linear_coefficient({ChannelKind::laplacian}) - 0.5) < 1e-8);
    const int sq = learned.term_index({2, 0, 0, 0, 0});
    REQUIRE(sq >= 0);
    CHECK(std::abs(learned.coefficients[sq] - 0.125) < 1e-8);

    const EvolutionResult again = solve_evolution(learned, ops, u0, forcing, dt, steps);
    CHECK((again.trajectory - run.trajectory).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("relative L2 and argument checks") {
    CHECK(relative_l2(Eigen::Vector2d(1.0, 1.0), Eigen::Vector2d(1.0, 2.0)) == doctest::Approx(1.0 / std::sqrt(5.0)));
    CHECK_THROWS_AS(relative_l2(Vector::Zero(2), Vector::Zero(2)), Error);
    const PointCloud cloud = analytic_normals(unit_circle(), circle_nodes(10));
    const DiscreteOperators ops(cloud, KernelSpec::matern(2, 4));
    const SparseModel m = make_model(ModelKind::evolution, 2, 1, {{"u", -1.0}});
    CHECK_THROWS_AS(solve_evolution(m, ops, Vector::Ones(10), Matrix::Zero(3, 10), 0.0, 2), Error);
    CHECK_THROWS_AS(solve_evolution(m, ops, Vector::Ones(10), Matrix::Zero(2, 10), 0.1, 2), Error);
}
