#include "surfpde/discovery.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "surfpde/errors.hpp"
#include "surfpde/io.hpp"

namespace surfpde {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fixed4(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

// "a·X + b·Y" with terms by |coefficient| descending.
std::string format_terms(const SparseModel& m) {
    std::vector<int> order = m.support;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return std::abs(m.coefficients[a]) > std::abs(m.coefficients[b]);
    });
    std::string out;
    for (size_t k = 0; k < order.size(); ++k) {
        const double c = m.coefficients[order[k]];
        const std::string& label = m.terms[static_cast<size_t>(order[k])].label;
        if (k == 0) {
            out += c < 0.0 ? "−" : "";
        } else {
            out += c < 0.0 ? " − " : " + ";
        }
        out += fixed4(std::abs(c));
        if (label != "1") out += "·" + label;
    }
    return out.empty() ? "0" : out;
}

void record_solution(SparseModel& model, const RegressionOutcome& outcome, const RegressionConfig& config) {
    model.coefficients = outcome.final.xi;
    model.raw_coefficients = outcome.raw.xi;
    model.support = outcome.final.support;
    model.method = config.method;
    model.mu = outcome.raw.mu;
    model.prune_rel_tol = config.prune_rel_tol;
    model.tol = config.tol;
    model.diagnostics.kkt_residual = outcome.raw.kkt_residual;
    model.diagnostics.iterations = outcome.raw.iterations;
    for (const auto& w : outcome.raw.warnings) model.diagnostics.warnings.push_back(w);
}

void record_operators(SparseModel& model, const DiscreteOperators& ops) {
    model.diagnostics.jitter = ops.jitter();
    model.diagnostics.rcond = ops.rcond();
    model.diagnostics.seed = ops.cloud().seed();
}

Interpolant checked_interpolant(const DiscreteOperators& ops, const Vector& samples, SparseModel& model) {
    Interpolant interp = interpolate(ops, samples);
    model.diagnostics.interpolation_residual = std::max(model.diagnostics.interpolation_residual, interp.residual);
    if (interp.ill_conditioned) {
        model.diagnostics.warnings.push_back("interpolation residual " + format_double(interp.residual) +
                                             " exceeds tolerance");
    }
    return interp;
}

}  // namespace

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::stationary: return "stationary";
        case ModelKind::evolution: return "evolution";
        case ModelKind::eikonal: return "eikonal";
        case ModelKind::biharmonic: return "biharmonic";
    }
    return "?";
}

ModelKind model_kind_from_string(const std::string& name) {
    for (ModelKind k : {ModelKind::stationary, ModelKind::evolution, ModelKind::eikonal, ModelKind::biharmonic}) {
        if (to_string(k) == name) return k;
    }
    fail(ErrorKind::invalid_argument, "unknown model kind '" + name + "'");
}

int SparseModel::term_index(const std::vector<int>& alpha) const {
    for (size_t j = 0; j < terms.size(); ++j) {
        if (terms[j].alpha == alpha) return static_cast<int>(j);
    }
    return -1;
}

double SparseModel::linear_coefficient(const Channel& channel) const {
    for (int c = 0; c < map.dim(); ++c) {
        if (map.channels[static_cast<size_t>(c)] == channel) {
            std::vector<int> alpha(static_cast<size_t>(map.dim()), 0);
            alpha[static_cast<size_t>(c)] = 1;
            const int j = term_index(alpha);
            return j >= 0 ? coefficients[j] : 0.0;
        }
    }
    return 0.0;
}

std::vector<std::string> SparseModel::support_labels() const {
    std::vector<std::string> out;
    for (int j : support) out.push_back(terms[static_cast<size_t>(j)].label);
    return out;
}

std::string SparseModel::equation() const {
    const std::string body = format_terms(*this);
    switch (kind) {
        case ModelKind::stationary: return body + " = f";
        case ModelKind::evolution: return "∂u/∂t = " + body + " + f";
        case ModelKind::biharmonic: return body + " = u";
        case ModelKind::eikonal: {
            std::string rhs = "0";
            if (!sources.empty()) {
                const auto& s = sources.front();
                rhs = (s.amplitude < 0.0 ? "−" : "") + fixed4(std::abs(s.amplitude)) + "·e^{−‖x−x_" +
                      std::to_string(s.node) + "‖²}";
            }
            return body + " − 1 = " + rhs;
        }
    }
    return body;
}

RegressionOutcome solve_regression(const Matrix& design, const Vector& target, const RegressionConfig& config) {
    RegressionProblem problem{design, target, config.mu, config.normalize_columns};
    RegressionOutcome out;
    switch (config.method) {
        case RegressionMethod::lasso_cd: out.raw = lasso(problem, config.tol, config.max_sweeps); break;
        case RegressionMethod::qp: out.raw = lasso_qp_oracle(problem, config.tol); break;
        case RegressionMethod::sqrt_lasso: out.raw = sqrt_lasso(problem); break;
        case RegressionMethod::least_squares:
            out.raw.xi = least_squares(design, target);
            out.raw.method = RegressionMethod::least_squares;
            out.raw.converged = true;
            for (Eigen::Index j = 0; j < out.raw.xi.size(); ++j) {
                if (out.raw.xi[j] != 0.0) out.raw.support.push_back(static_cast<int>(j));
            }
            problem.mu = 0.0;
            out.raw.objective = lasso_objective(problem, out.raw.xi);
            out.raw.kkt_residual = kkt_check(problem, out.raw.xi);
            break;
    }
    if (config.prune_rel_tol > 0.0) {
        problem.mu = out.raw.mu;
        out.final = threshold_and_refit(problem, out.raw, config.prune_rel_tol);
    } else {
        if (out.raw.support.empty()) fail(ErrorKind::empty_model, "regression selected no terms");
        out.final = out.raw;
    }
    return out;
}

SparseModel discover_stationary(const DiscreteOperators& ops, const Vector& samples, const Vector& forcing, int ell,
                                const RegressionConfig& config) {
    const auto start = Clock::now();
    require(forcing.size() == ops.size(), "forcing length does not match the cloud");
    require(forcing.allFinite(), "forcing must be finite");
    SparseModel model;
    model.kind = ModelKind::stationary;
    model.map = FeatureMap::standard(ops.dim());
    model.ell = ell;
    record_operators(model, ops);
    const Interpolant interp = checked_interpolant(ops, samples, model);
    const FeatureLibrary lib =
        assemble_library(evaluate_channels(ops, interp, model.map), model.map, enumerate_terms(model.map, ell));
    model.terms = lib.terms;
    model.diagnostics.rows = lib.matrix.rows();
    record_solution(model, solve_regression(lib.matrix, forcing, config), config);
    model.diagnostics.runtime_seconds = seconds_since(start);
    return model;
}

SparseModel discover_stationary(const PointCloud& cloud, const Vector& samples, const Vector& forcing,
                                const KernelSpec& kernel, int ell, const RegressionConfig& config) {
    const auto start = Clock::now();
    const DiscreteOperators ops(cloud, kernel);
    SparseModel model = discover_stationary(ops, samples, forcing, ell, config);
    model.diagnostics.runtime_seconds = seconds_since(start);
    return model;
}

SparseModel discover_evolution(const DiscreteOperators& ops, const Snapshots& snaps, int ell,
                               const RegressionConfig& config) {
    const auto start = Clock::now();
    if (snaps.steps() < 2) {
        fail(ErrorKind::insufficient_snapshots, "evolution discovery needs M >= 2 time steps");
    }
    snaps.validate(ops.size());
    SparseModel model;
    model.kind = ModelKind::evolution;
    model.map = FeatureMap::standard(ops.dim());
    model.ell = ell;
    record_operators(model, ops);
    model.terms = enumerate_terms(model.map, ell);

    const int levels = snaps.steps() + 1;
    std::vector<Vector> nodal(static_cast<size_t>(levels));
    std::vector<Matrix> channels(static_cast<size_t>(levels));
    for (int j = 0; j < levels; ++j) {
        nodal[static_cast<size_t>(j)] =
            checked_interpolant(ops, snaps.values.row(j).transpose(), model).nodal_values();
        channels[static_cast<size_t>(j)] = evaluate_channels(ops, nodal[static_cast<size_t>(j)], model.map);
    }

    const Eigen::Index n = ops.size();
    const Eigen::Index rows = static_cast<Eigen::Index>(snaps.steps() - 1) * n;
    Matrix design(rows, static_cast<Eigen::Index>(model.terms.size()));
    Vector target(rows);
    for (int j = 1; j <= snaps.steps() - 1; ++j) {
        const auto s = static_cast<size_t>(j);
        const Sbdf2Rows r = sbdf2_combine(model.map, {channels[s - 1], channels[s], channels[s + 1]},
                                          {nodal[s - 1], nodal[s], nodal[s + 1]},
                                          snaps.forcing.row(j - 1).transpose(), snaps.forcing.row(j).transpose(),
                                          snaps.dt);
        const FeatureLibrary lib = assemble_library(r.channels, model.map, model.terms);
        design.middleRows(static_cast<Eigen::Index>(j - 1) * n, n) = lib.matrix;
        target.segment(static_cast<Eigen::Index>(j - 1) * n, n) = r.lhs - r.forcing;
    }
    model.diagnostics.rows = rows;
    record_solution(model, solve_regression(design, target, config), config);
    model.diagnostics.runtime_seconds = seconds_since(start);
    return model;
}

SparseModel discover_evolution(const PointCloud& cloud, const Snapshots& snaps, const KernelSpec& kernel, int ell,
                               const RegressionConfig& config) {
    const auto start = Clock::now();
    const DiscreteOperators ops(cloud, kernel);
    SparseModel model = discover_evolution(ops, snaps, ell, config);
    model.diagnostics.runtime_seconds = seconds_since(start);
    return model;
}

SparseModel discover_eikonal(const DiscreteOperators& ops, const Vector& samples, const EikonalConfig& config) {
    const auto start = Clock::now();
    require(config.sigma2 > 0.0, "source kernel sigma2 must be positive");
    SparseModel model;
    model.kind = ModelKind::eikonal;
    model.p_values = config.p_values;
    record_operators(model, ops);
    const Interpolant interp = checked_interpolant(ops, samples, model);
    const FeatureLibrary lib = eikonal_library(ops, interp, config.p_values);
    model.map = lib.map;
    model.ell = 1;
    model.terms = lib.terms;
    model.diagnostics.rows = lib.matrix.rows();
    if (samples.lpNorm<Eigen::Infinity>() == 0.0) {
        model.diagnostics.warnings.push_back("degenerate input: samples are identically zero, distance data required");
    }

    const Vector ones = Vector::Ones(ops.size());
    RegressionProblem step1{lib.matrix, ones, config.step1.mu, config.step1.normalize_columns};
    RegressionOutcome outcome;
    outcome.raw = config.step1.method == RegressionMethod::sqrt_lasso
                      ? sqrt_lasso(step1)
                      : lasso(step1, config.step1.tol, config.step1.max_sweeps);
    outcome.final = outcome.raw;
    if (config.step1.prune_rel_tol > 0.0 && !outcome.raw.support.empty()) {
        outcome.final = threshold_and_refit(step1, outcome.raw, config.step1.prune_rel_tol);
    }
    record_solution(model, outcome, config.step1);

    const Vector residual = lib.matrix * model.coefficients - ones;
    model.residual_norm = residual.norm();
    model.source_mu = config.mu2;
    model.source_sigma2 = config.sigma2;
    if (residual.lpNorm<Eigen::Infinity>() < 1e-12) {
        model.diagnostics.warnings.push_back("no source signal: step-1 residuals vanish");
        model.source_fit_residual_norm = model.residual_norm;
    } else {
        const KernelSpec gauss = KernelSpec::gaussian(ops.dim(), config.sigma2, config.gaussian_squared);
        const Matrix psi = kernel_matrix(gauss, ops.cloud().nodes(), ops.cloud().nodes());
        const SparseSolution eta = lasso(RegressionProblem{psi, residual, config.mu2, false}, config.step1.tol,
                                         config.max_sweeps2);
        for (const auto& w : eta.warnings) model.diagnostics.warnings.push_back("source fit: " + w);
        model.source_fit_residual_norm = (psi * eta.xi - residual).norm();
        for (int j : eta.support) {
            model.sources.push_back({j, ops.cloud().node(j), eta.xi[j]});
        }
        std::stable_sort(model.sources.begin(), model.sources.end(), [](const SourceTerm& a, const SourceTerm& b) {
            return std::abs(a.amplitude) > std::abs(b.amplitude);
        });
    }
    model.diagnostics.runtime_seconds = seconds_since(start);
    return model;
}

SparseModel discover_eikonal(const PointCloud& cloud, const Vector& samples, const KernelSpec& kernel,
                             const EikonalConfig& config) {
    const auto start = Clock::now();
    const DiscreteOperators ops(cloud, kernel);
    SparseModel model = discover_eikonal(ops, samples, config);
    model.diagnostics.runtime_seconds = seconds_since(start);
    return model;
}

SparseModel discover_biharmonic(const DiscreteOperators& ops, const Vector& samples, int ell,
                                const RegressionConfig& config) {
    const auto start = Clock::now();
    require_fourth_order(ops.kernel());
    SparseModel model;
    model.kind = ModelKind::biharmonic;
    model.map = FeatureMap::extended(ops.dim());
    model.ell = ell;
    record_operators(model, ops);
    const Interpolant interp = checked_interpolant(ops, samples, model);
    const FeatureLibrary lib =
        assemble_library(evaluate_channels(ops, interp, model.map), model.map, enumerate_terms(model.map, ell));
    model.terms = lib.terms;
    model.diagnostics.rows = lib.matrix.rows();
    record_solution(model, solve_regression(lib.matrix, interp.nodal_values(), config), config);
    model.diagnostics.runtime_seconds = seconds_since(start);
    return model;
}

SparseModel discover_biharmonic(const PointCloud& cloud, const Vector& samples, const KernelSpec& kernel, int ell,
                                const RegressionConfig& config) {
    const auto start = Clock::now();
    const DiscreteOperators ops(cloud, kernel);
    SparseModel model = discover_biharmonic(ops, samples, ell, config);
    model.diagnostics.runtime_seconds = seconds_since(start);
    return model;
}

}  // namespace surfpde
