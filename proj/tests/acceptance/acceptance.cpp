// Acceptance driver: one PASS/FAIL line per criterion. With no argument every
// criterion runs; otherwise only the named ones (1..9, sqrt).
#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "surfpde/errors.hpp"
#include "surfpde/fields.hpp"
#include "surfpde/io.hpp"
#include "surfpde/recipes.hpp"
#include "surfpde/solver.hpp"

using namespace surfpde;

namespace {

struct Verdict {
    bool pass = true;
    std::vector<std::string> details;

    void add(bool ok, const std::string& detail) {
        pass = pass && ok;
        details.push_back(std::string(ok ? "ok   " : "FAIL ") + detail);
    }
};

std::string out_dir() {
    const char* env = std::getenv("SURFPDE_ACCEPTANCE_DIR");
    return env ? env : "acceptance_out";
}

// Runs a recipe and keeps the rows whose name contains any of `keys` (all
// rows when empty).
Verdict from_recipe(const std::string& recipe, const std::vector<std::string>& keys = {}, int n = 0) {
    RecipeOptions opt;
    opt.output_dir = out_dir();
    opt.n = n;
    opt.log = &std::cout;
    const RecipeReport report = run_recipe(recipe, opt);
    Verdict v;
    int used = 0;
    for (const CheckRow& row : report.rows) {
        bool keep = keys.empty();
        for (const auto& k : keys) keep = keep || row.name.find(k) != std::string::npos;
        if (!keep) continue;
        ++used;
        v.add(row.pass, row.format());
    }
    if (used == 0) v.add(false, "recipe " + recipe + " produced no matching rows");
    return v;
}

std::string sci(double v) {
    std::ostringstream s;
    s.precision(3);
    s << std::scientific << v;
    return s.str();
}

// --- property suite ----------------------------------------------------------

void projections(Verdict& v) {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> n01;
    double worst = 0.0;
    for (int d : {2, 3}) {
        Matrix nodes(100, d), normals(100, d);
        for (Eigen::Index i = 0; i < nodes.size(); ++i) {
            nodes.data()[i] = n01(rng);
            normals.data()[i] = n01(rng);
        }
        const PointCloud c = PointCloud(nodes).with_normals(normals);
        for (Eigen::Index i = 0; i < 100; ++i) {
            const Matrix& p = c.projection(i);
            worst = std::max({worst, (p * p - p).lpNorm<Eigen::Infinity>(),
                              (p * c.normal(i)).lpNorm<Eigen::Infinity>(), std::abs(p.trace() - (d - 1))});
        }
    }
    v.add(worst <= 1e-12, "8a projection identities, worst deviation " + sci(worst) + " (limit 1e-12)");
}

void spherical_harmonic(Verdict& v) {
    std::vector<double> errs;
    for (int n : {200, 500, 1000}) {
        const PointCloud c = analytic_normals(unit_sphere(), sphere_nodes(n));
        const DiscreteOperators ops(c, KernelSpec::matern(3, 4));
        const Vector z = c.nodes().col(2);
        errs.push_back((laplace_beltrami_nodal(ops, z) + 2.0 * z).norm() / (2.0 * z).norm());
    }
    const bool ok = errs[0] > errs[1] && errs[1] > errs[2] && errs[2] < 5e-4;
    v.add(ok, "8b Delta_S z vs -2z relative L2 over N=200,500,1000: " + sci(errs[0]) + ", " + sci(errs[1]) + ", " +
                  sci(errs[2]) + " (decreasing, last < 5e-4)");
}

void lasso_suite(Verdict& v) {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> n01;
    std::uniform_real_distribution<double> mu_dist(0.01, 10.0);
    const double tol = 1e-12;
    double worst_obj = 0.0, worst_kkt = 0.0;
    bool all_converged = true;
    for (int trial = 0; trial < 25; ++trial) {
        const Eigen::Index m = 15 + 2 * trial, n = 3 + trial % 10;
        RegressionProblem p;
        p.design.resize(m, n);
        for (Eigen::Index i = 0; i < p.design.size(); ++i) p.design.data()[i] = n01(rng);
        Vector truth = Vector::Zero(n);
        for (Eigen::Index j = 0; j < n; j += 2) truth[j] = n01(rng);
        p.target = p.design * truth;
        for (Eigen::Index i = 0; i < m; ++i) p.target[i] += 0.05 * n01(rng);
        p.mu = mu_dist(rng);
        const SparseSolution cd = lasso(p, tol);
        const SparseSolution qp = lasso_qp_oracle(p, tol);
        all_converged = all_converged && cd.converged;
        worst_obj = std::max(worst_obj, std::abs(cd.objective - qp.objective) / std::max(1.0, std::abs(qp.objective)));
        if (cd.converged) worst_kkt = std::max(worst_kkt, cd.kkt_residual);
    }
    v.add(worst_obj <= 1e-6, "8c LASSO vs QP oracle, 25 problems, worst relative objective gap " + sci(worst_obj) +
                                 " (limit 1e-6)");
    v.add(all_converged && worst_kkt <= 10.0 * tol,
          "8c KKT residual at convergence, worst " + sci(worst_kkt) + " (limit 10 tol = " + sci(10.0 * tol) + ")");

    Matrix g(40, 10);
    for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = n01(rng);
    const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ() * Matrix::Identity(40, 10);
    Vector b(40);
    for (Eigen::Index i = 0; i < 40; ++i) b[i] = n01(rng);
    double worst_cf = 0.0;
    for (double mu : {0.0, 0.2, 0.8, 2.0}) {
        const SparseSolution s = lasso(RegressionProblem{q, b, mu, false});
        const Vector c = q.transpose() * b;
        for (Eigen::Index j = 0; j < 10; ++j) {
            const double want = c[j] > mu / 2 ? c[j] - mu / 2 : (c[j] < -mu / 2 ? c[j] + mu / 2 : 0.0);
            worst_cf = std::max(worst_cf, std::abs(s.xi[j] - want));
        }
    }
    v.add(worst_cf <= 1e-10, "8c orthonormal design soft-threshold closed form, worst " + sci(worst_cf) +
                                 " (limit 1e-10)");
}

SparseModel handmade(ModelKind kind, int d, int ell, const std::map<std::string, double>& coefs) {
    SparseModel m;
    m.kind = kind;
    m.map = FeatureMap::standard(d);
    m.ell = ell;
    m.terms = enumerate_terms(m.map, ell);
    m.coefficients = Vector::Zero(static_cast<Eigen::Index>(m.terms.size()));
    for (size_t j = 0; j < m.terms.size(); ++j) {
        const auto it = coefs.find(m.terms[j].label);
        if (it == coefs.end()) continue;
        m.coefficients[static_cast<Eigen::Index>(j)] = it->second;
        m.support.push_back(static_cast<int>(j));
    }
    m.raw_coefficients = m.coefficients;
    return m;
}

void sbdf2_order(Verdict& v) {
    const PointCloud c = analytic_normals(unit_circle(), circle_nodes(16));
    const DiscreteOperators ops(c, KernelSpec::matern(2, 4));
    const SparseModel model = handmade(ModelKind::evolution, 2, 1, {{"u", -1.0}});
    std::vector<double> err;
    for (double dt : {0.01, 0.005, 0.0025, 0.00125}) {
        const int steps = static_cast<int>(std::lround(1.0 / dt));
        const EvolutionResult r = solve_evolution(model, ops, Vector::Ones(16), Matrix::Zero(steps + 1, 16), dt, steps);
        err.push_back(std::abs(r.trajectory(steps, 0) - std::exp(-1.0)));
    }
    bool ok = true;
    std::string orders;
    for (size_t k = 1; k < err.size(); ++k) {
        const double order = std::log2(err[k - 1] / err[k]);
        ok = ok && std::abs(order - 2.0) <= 0.2;
        orders += (k > 1 ? ", " : "") + std::to_string(order);
    }
    v.add(ok, "8d SBDF2 observed order on u' = -u: " + orders + " (2 +- 0.2)");
}

void round_trip(Verdict& v) {
    const PointCloud c = analytic_normals(unit_sphere(), sphere_nodes(300));
    const DiscreteOperators ops(c, KernelSpec::matern(3, 4));
    const Vector u = sample_field(field_by_name("exp-sum", 3), c);
    RegressionConfig cfg;
    cfg.mu = 0.0;
    cfg.prune_rel_tol = 0.0;

    const Vector f = -laplace_beltrami_nodal(ops, u) + u;
    const SparseModel sm = discover_stationary(ops, u, f, 1, cfg);
    double coef_err = 0.0;
    for (size_t j = 0; j < sm.terms.size(); ++j) {
        const std::string& l = sm.terms[j].label;
        const double want = l == "Δ_S u" ? -1.0 : (l == "u" ? 1.0 : 0.0);
        coef_err = std::max(coef_err, std::abs(sm.coefficients[static_cast<Eigen::Index>(j)] - want));
    }
    const Vector us = solve_stationary(sm, ops, f).u;
    const double sol_err = (us - u).lpNorm<Eigen::Infinity>() / u.lpNorm<Eigen::Infinity>();
    v.add(coef_err <= 1e-8 && sol_err <= 1e-6, "8e stationary round trip: coefficient error " + sci(coef_err) +
                                                    " (limit 1e-8), nodal error " + sci(sol_err) + " (limit 1e-6)");

    const SparseModel truth = handmade(ModelKind::evolution, 3, 2, {{"Δ_S u", 0.5}, {"u²", 0.125}});
    const int steps = 20;
    const double dt = 0.01;
    Matrix forcing(steps + 1, c.size());
    const Vector z = c.nodes().col(2);
    for (int j = 0; j <= steps; ++j) forcing.row(j) = (std::cos(j * dt) * z).transpose();
    const EvolutionResult run = solve_evolution(truth, ops, u, forcing, dt, steps);
    Snapshots snaps{run.times, run.trajectory, forcing, dt};
    const SparseModel em = discover_evolution(ops, snaps, 2, cfg);
    double ecoef = 0.0;
    for (size_t j = 0; j < em.terms.size(); ++j) {
        const std::string& l = em.terms[j].label;
        const double want = l == "Δ_S u" ? 0.5 : (l == "u²" ? 0.125 : 0.0);
        ecoef = std::max(ecoef, std::abs(em.coefficients[static_cast<Eigen::Index>(j)] - want));
    }
    const EvolutionResult again = solve_evolution(em, ops, u, forcing, dt, steps);
    const double esol = (again.trajectory - run.trajectory).lpNorm<Eigen::Infinity>() /
                        run.trajectory.lpNorm<Eigen::Infinity>();
    v.add(ecoef <= 1e-8 && esol <= 1e-6, "8e evolution round trip: coefficient error " + sci(ecoef) +
                                             " (limit 1e-8), trajectory error " + sci(esol) + " (limit 1e-6)");
}

void interpolation(Verdict& v) {
    struct Case {
        std::string name;
        PointCloud cloud;
        KernelSpec kernel;
        Vector samples;
    };
    std::vector<Case> cases;
    {
        const PointCloud c = analytic_normals(unit_circle(), circle_nodes(30));
        cases.push_back({"circle N=30 m=6", c, KernelSpec::matern(2, 6), sample_field(field_by_name("circle-exp", 2), c)});
    }
    {
        const PointCloud c = analytic_normals(unit_circle(), circle_nodes(100));
        cases.push_back({"circle N=100 m=4 distance", c, KernelSpec::matern(2, 4), circle_geodesic_distance(c, 19)});
    }
    for (int n : {200, 1000}) {
        const PointCloud c = analytic_normals(unit_sphere(), sphere_nodes(n));
        cases.push_back({"sphere N=" + std::to_string(n), c, KernelSpec::matern(3, 4),
                         sample_field(field_by_name("exp-sum", 3), c)});
    }
    {
        const Surface t = torus();
        const PointCloud c = analytic_normals(t, implicit_surface_nodes(t, 800, 1));
        cases.push_back({"torus N=800", c, KernelSpec::matern(3, 4), sample_field(field_by_name("sin-product", 3), c)});
    }
    for (const Case& cs : cases) {
        const DiscreteOperators ops(cs.cloud, cs.kernel);
        const Interpolant in = interpolate(ops, cs.samples);
        const bool ok = in.residual <= 1e-8 || in.ill_conditioned;
        v.add(ok, "8f interpolation " + cs.name + ": residual " + sci(in.residual) +
                      (in.ill_conditioned ? ", flagged ill-conditioned" : ""));
    }
}

Verdict property_suite() {
    Verdict v;
    projections(v);
    spherical_harmonic(v);
    lasso_suite(v);
    sbdf2_order(v);
    round_trip(v);
    interpolation(v);
    return v;
}

struct Criterion {
    std::string id;
    std::string title;
    std::function<Verdict()> run;
};

std::vector<Criterion> criteria() {
    // ex1-sphere runs every sphere case once; criteria 2, 3 and 9 share it.
    static std::optional<RecipeReport> sphere;
    auto sphere_rows = [](const std::vector<std::string>& keys) {
        if (!sphere) {
            RecipeOptions opt;
            opt.output_dir = out_dir();
            opt.log = &std::cout;
            sphere = run_recipe("ex1-sphere", opt);
        }
        Verdict v;
        for (const CheckRow& row : sphere->rows) {
            for (const auto& k : keys) {
                if (row.name.rfind(k, 0) == 0) {
                    v.add(row.pass, row.format());
                    break;
                }
            }
        }
        if (v.details.empty()) v.add(false, "no matching rows");
        return v;
    };
    return {
        {"1", "stationary, circle N=30", [] { return from_recipe("ex1-circle"); }},
        {"2", "stationary, sphere, extension normals, N=200 and 1000",
         [=] { return sphere_rows({"N=200 extension", "N=1000 extension"}); }},
        {"3", "stationary, sphere N=1000, analytic normals", [=] { return sphere_rows({"N=1000 analytic"}); }},
        {"4", "reaction-diffusion, sphere N=500", [] { return from_recipe("ex2-sphere", {"support", "coef", "runtime"}); }},
        {"5", "reaction-diffusion, torus N=3968", [] { return from_recipe("ex2-surfaces"); }},
        {"6", "biharmonic, sphere N=100, 55-term library", [] { return from_recipe("ex4"); }},
        {"7", "eikonal, circle N=100, source node 19", [] { return from_recipe("ex3-circle"); }},
        {"8", "property suite", property_suite},
        {"9", "stationary, sphere N=1000, 0.01% noise", [=] { return sphere_rows({"N=1000 noise"}); }},
        {"sqrt", "square-root LASSO, sphere N=200", [] { return from_recipe("ex1-sqrt"); }},
    };
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> wanted(argv + 1, argv + argc);
    std::vector<std::string> summary;
    bool all = true;
    for (const Criterion& c : criteria()) {
        if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v.add(false, std::string("error: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        for (const auto& d : v.details) std::cout << "    " << d << '\n';
        std::ostringstream line;
        line << "criterion " << c.id << " (" << c.title << "): " << (v.pass ? "PASS" : "FAIL") << " [" << secs
             << " s]";
        std::cout << line.str() << std::endl;
        summary.push_back(line.str());
        all = all && v.pass;
    }
    std::cout << "\nsummary\n";
    for (const auto& s : summary) std::cout << s << '\n';
    return all ? 0 : 1;
}
