#include "surfpde/regression.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

#include "surfpde/errors.hpp"

namespace surfpde {
namespace {

double soft_threshold(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

std::vector<int> support_of(const Vector& xi) {
    std::vector<int> s;
    for (Eigen::Index j = 0; j < xi.size(); ++j) {
        if (xi[j] != 0.0) s.push_back(static_cast<int>(j));
    }
    return s;
}

// Quadratic data of the squared loss in a column-scaled basis z = s .* xi:
// G = D^T D, c = D^T b with D = A diag(1/s), and per-coordinate penalties
// w_j = mu / s_j so that the objective equals the unscaled one.
struct Normal {
    Vector s;
    Vector w;
    Matrix g;
    Vector c;
    double bb = 0.0;

    Normal(const RegressionProblem& p, double mu) : s(p.cols()), w(p.cols()) {
        for (Eigen::Index j = 0; j < p.cols(); ++j) {
            const double n = p.design.col(j).norm();
            s[j] = n > 0.0 ? n : 1.0;
            w[j] = mu / s[j];
        }
        const Matrix d = p.design * s.cwiseInverse().asDiagonal();
        g = d.transpose() * d;
        c = d.transpose() * p.target;
        bb = p.target.squaredNorm();
    }

    double objective(const Vector& z) const {
        return z.dot(g * z) - 2.0 * c.dot(z) + bb + w.dot(z.cwiseAbs());
    }

    // Exact minimiser for a fixed sign pattern, if it is consistent and
    // optimal: G_SS z = c_S - (w_S/2) s, then sign and inactive checks.
    std::optional<Vector> active_set_solution(const Vector& pattern) const {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index j = 0; j < pattern.size(); ++j) {
            if (pattern[j] != 0.0) idx.push_back(j);
        }
        Vector z = Vector::Zero(pattern.size());
        if (!idx.empty()) {
            const auto k = static_cast<Eigen::Index>(idx.size());
            Matrix gs(k, k);
            Vector rhs(k);
            for (Eigen::Index a = 0; a < k; ++a) {
                rhs[a] = c[idx[a]] - 0.5 * w[idx[a]] * pattern[idx[a]];
                for (Eigen::Index b = 0; b < k; ++b) gs(a, b) = g(idx[a], idx[b]);
            }
            const Eigen::LLT<Matrix> llt(gs);
            if (llt.info() != Eigen::Success) return std::nullopt;
            const Vector sol = llt.solve(rhs);
            if (!sol.allFinite() || (gs * sol - rhs).norm() > 1e-9 * std::max(1.0, rhs.norm())) return std::nullopt;
            for (Eigen::Index a = 0; a < k; ++a) {
                if (w[idx[a]] > 0.0 && sign(sol[a]) != pattern[idx[a]]) return std::nullopt;
                z[idx[a]] = sol[a];
            }
        }
        // Inactive coordinates must satisfy |grad_j| <= w_j up to roundoff.
        const Vector grad = 2.0 * (g * z - c);
        const double slack = 1e-10 * std::max({1.0, w.maxCoeff(), 2.0 * c.lpNorm<Eigen::Infinity>()});
        for (Eigen::Index j = 0; j < z.size(); ++j) {
            if (pattern[j] == 0.0 && std::abs(grad[j]) > w[j] + slack) return std::nullopt;
        }
        return z;
    }
};

Vector column_scales(const Matrix& a) {
    Vector s(a.cols());
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        const double n = a.col(j).norm();
        require(n > 0.0, "column normalisation requested but column " + std::to_string(j) + " is zero");
        s[j] = n;
    }
    return s;
}

// Runs `solve` on the column-normalised problem and maps xi back.
template <class Solve>
SparseSolution with_normalisation(const RegressionProblem& p, Solve solve) {
    const Vector scales = column_scales(p.design);
    RegressionProblem scaled = p;
    scaled.normalize_columns = false;
    scaled.design = p.design * scales.cwiseInverse().asDiagonal();
    SparseSolution s = solve(scaled);
    s.xi = s.xi.cwiseQuotient(scales);
    return s;
}

SparseSolution lasso_cd(const RegressionProblem& p, const Vector& xi0, double tol, int max_sweeps) {
    const double mu = *p.mu;
    const Normal q(p, mu);
    const Eigen::Index n = p.cols();
    SparseSolution out;
    out.method = RegressionMethod::lasso_cd;
    out.mu = mu;
    std::vector<bool> zero_col(static_cast<size_t>(n), false);
    for (Eigen::Index j = 0; j < n; ++j) {
        if (p.design.col(j).squaredNorm() == 0.0) {
            zero_col[static_cast<size_t>(j)] = true;
            out.warnings.push_back("column " + std::to_string(j) + " is zero; its coefficient is pinned at 0");
        }
    }
    Vector z = xi0.cwiseProduct(q.s);
    Vector gz = q.g * z;
    Vector last_pattern, failed_pattern;
    const auto same = [](const Vector& a, const Vector& b) { return a.size() == b.size() && a == b; };
    double obj = q.objective(z);
    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        // Largest coordinate change measured in the unscaled coefficients.
        double max_change = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (zero_col[static_cast<size_t>(j)]) continue;
            const double gjj = q.g(j, j);
            const double rho = q.c[j] - gz[j] + gjj * z[j];
            const double updated = soft_threshold(rho, 0.5 * q.w[j]) / gjj;
            const double delta = updated - z[j];
            if (delta != 0.0) {
                gz.noalias() += q.g.col(j) * delta;
                z[j] = updated;
                max_change = std::max(max_change, std::abs(delta) / q.s[j]);
            }
        }
        const double next = q.objective(z);
        if (next > obj + 1e-12 * std::max(1.0, std::abs(obj))) ++out.objective_increases;
        obj = next;
        if (max_change <= tol) {
            // Polish: the exact solve removes the residual step error.
            const Vector pattern = z.unaryExpr([](double v) { return sign(v); });
            if (!same(pattern, failed_pattern)) {
                auto exact = q.active_set_solution(pattern);
                if (exact && q.objective(*exact) <= obj + 1e-12 * std::max(1.0, std::abs(obj))) z = *exact;
            }
            out.converged = true;
            ++sweep;
            break;
        }
        if ((sweep + 1) % 25 == 0) {
            // The exact solve costs O(|S|^3); try a sign pattern once, after
            // it has held since the previous check.
            Vector pattern = z.unaryExpr([](double v) { return sign(v); });
            const bool stable = same(pattern, last_pattern);
            last_pattern = pattern;
            if (!stable || same(pattern, failed_pattern)) continue;
            auto exact = q.active_set_solution(pattern);
            if (exact && q.objective(*exact) <= obj + 1e-12 * std::max(1.0, std::abs(obj))) {
                z = *exact;
                out.converged = true;
                ++sweep;
                break;
            }
            failed_pattern = pattern;
        }
    }
    if (!out.converged) {
        out.warnings.push_back("coordinate descent hit the sweep limit " + std::to_string(max_sweeps));
    }
    out.iterations = sweep;
    out.xi = z.cwiseQuotient(q.s);
    out.support = support_of(out.xi);
    out.objective = lasso_objective(p, out.xi);
    out.kkt_residual = kkt_check(p, out.xi);
    return out;
}

// Projection of (x, g) onto {|x| <= g}.
void project_epigraph(double& x, double& g) {
    const double ax = std::abs(x);
    if (ax <= g) return;
    if (g <= -ax) {
        x = 0.0;
        g = 0.0;
        return;
    }
    const double t = 0.5 * (ax + g);
    x = sign(x) * t;
    g = t;
}

double sqrt_objective(const RegressionProblem& p, const Vector& xi, double mu) {
    return (p.design * xi - p.target).norm() + mu * xi.lpNorm<1>();
}

}  // namespace

void RegressionProblem::validate() const {
    require(design.rows() == target.size(), "design rows must match the target length");
    require(design.cols() >= 1, "design needs at least one column");
    require(design.allFinite() && target.allFinite(), "regression data must be finite");
    if (mu) require(*mu >= 0.0 && std::isfinite(*mu), "regularisation mu must be finite and >= 0");
}

std::string to_string(RegressionMethod method) {
    switch (method) {
        case RegressionMethod::lasso_cd: return "lasso_cd";
        case RegressionMethod::qp: return "qp";
        case RegressionMethod::sqrt_lasso: return "sqrt_lasso";
        case RegressionMethod::least_squares: return "least_squares";
    }
    return "?";
}

double lasso_objective(const RegressionProblem& problem, const Vector& xi) {
    return (problem.design * xi - problem.target).squaredNorm() + problem.mu.value_or(0.0) * xi.lpNorm<1>();
}

double kkt_check(const RegressionProblem& problem, const Vector& xi) {
    const double mu = problem.mu.value_or(0.0);
    const Vector g = 2.0 * (problem.design.transpose() * (problem.design * xi - problem.target));
    double worst = 0.0;
    for (Eigen::Index j = 0; j < xi.size(); ++j) {
        const double v = xi[j] != 0.0 ? std::abs(g[j] + mu * sign(xi[j])) : std::max(0.0, std::abs(g[j]) - mu);
        worst = std::max(worst, v);
    }
    return worst;
}

SparseSolution lasso(const RegressionProblem& problem, double tol, int max_sweeps) {
    problem.validate();
    require(problem.mu.has_value(), "lasso needs an explicit mu");
    if (problem.normalize_columns) {
        return with_normalisation(problem, [&](const RegressionProblem& p) { return lasso(p, tol, max_sweeps); });
    }
    return lasso_cd(problem, Vector::Zero(problem.cols()), tol, max_sweeps);
}

SparseSolution lasso_qp_oracle(const RegressionProblem& problem, double tol) {
    problem.validate();
    require(problem.mu.has_value(), "lasso_qp_oracle needs an explicit mu");
    if (problem.cols() > 64) {
        fail(ErrorKind::oracle_scale_exceeded, "QP oracle is limited to n <= 64, got " + std::to_string(problem.cols()));
    }
    if (problem.normalize_columns) {
        return with_normalisation(problem, [&](const RegressionProblem& p) { return lasso_qp_oracle(p, tol); });
    }
    const double mu = *problem.mu;
    const Normal q(problem, mu);
    const Eigen::Index n = problem.cols();
    const double lipschitz = 2.0 * Eigen::SelfAdjointEigenSolver<Matrix>(q.g, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();

    SparseSolution out;
    out.method = RegressionMethod::qp;
    out.mu = mu;
    Vector xi = Vector::Zero(n), gamma = Vector::Zero(n);
    if (lipschitz > 0.0) {
        const double step = 1.0 / lipschitz;
        Vector y_xi = xi, y_gamma = gamma;
        double t = 1.0;
        double prev_obj = q.objective(xi);
        constexpr int max_iter = 500000;
        int it = 0;
        for (; it < max_iter; ++it) {
            Vector next_xi = y_xi - step * 2.0 * (q.g * y_xi - q.c);
            Vector next_gamma = y_gamma - step * q.w;
            for (Eigen::Index j = 0; j < n; ++j) project_epigraph(next_xi[j], next_gamma[j]);
            const double change = std::max((next_xi - xi).lpNorm<Eigen::Infinity>(),
                                           (next_gamma - gamma).lpNorm<Eigen::Infinity>());
            const double obj = next_xi.dot(q.g * next_xi) - 2.0 * q.c.dot(next_xi) + q.bb + q.w.dot(next_gamma);
            double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
            double momentum = (t - 1.0) / t_next;
            if (obj > prev_obj) {
                // Adaptive restart.
                t_next = 1.0;
                momentum = 0.0;
            }
            y_xi = next_xi + momentum * (next_xi - xi);
            y_gamma = next_gamma + momentum * (next_gamma - gamma);
            xi = std::move(next_xi);
            gamma = std::move(next_gamma);
            t = t_next;
            prev_obj = obj;
            if (change <= tol) {
                out.converged = true;
                ++it;
                break;
            }
        }
        out.iterations = it;
    } else {
        out.converged = true;
    }

    // Polish: the sign pattern of the gradient iterate, with coordinates that
    // are tiny relative to the largest one treated as inactive.
    const double scale = xi.lpNorm<Eigen::Infinity>();
    Vector pattern = xi.unaryExpr([scale](double v) { return std::abs(v) > 1e-9 * scale ? sign(v) : 0.0; });
    if (auto exact = q.active_set_solution(pattern)) {
        if (q.objective(*exact) <= q.objective(xi) + 1e-12 * std::max(1.0, q.bb)) {
            xi = *exact;
            out.converged = true;
        }
    }
    out.xi = xi.cwiseQuotient(q.s);
    out.support = support_of(out.xi);
    out.objective = lasso_objective(problem, out.xi);
    out.kkt_residual = kkt_check(problem, out.xi);
    return out;
}

double sqrt_lasso_default_mu(Eigen::Index rows, Eigen::Index cols) {
    require(rows >= 1 && cols >= 1, "sqrt-LASSO default penalty needs a non-empty design");
    const boost::math::normal_distribution<double> standard;
    const double q = boost::math::quantile(standard, 1.0 - 0.05 / (2.0 * static_cast<double>(cols)));
    return 1.1 / std::sqrt(static_cast<double>(rows)) * q;
}

SparseSolution sqrt_lasso(const RegressionProblem& problem, double tol, int max_outer) {
    problem.validate();
    if (problem.normalize_columns) {
        return with_normalisation(problem, [&](const RegressionProblem& p) { return sqrt_lasso(p, tol, max_outer); });
    }
    const double mu = problem.mu.value_or(sqrt_lasso_default_mu(problem.rows(), problem.cols()));
    const double sqrt_m = std::sqrt(static_cast<double>(problem.rows()));
    SparseSolution out;
    out.method = RegressionMethod::sqrt_lasso;
    out.mu = mu;
    if (!problem.mu) out.warnings.push_back("mu defaulted to the Belloni recommendation");

    if (mu == 0.0) {
        out.xi = least_squares(problem.design, problem.target);
        out.converged = true;
    } else {
        const double b_norm = problem.target.norm();
        if (b_norm == 0.0) {
            fail(ErrorKind::exact_fit, "sqrt-LASSO target is zero; use mu = 0 least squares instead");
        }
        Vector xi = Vector::Zero(problem.cols());
        double sigma = b_norm / sqrt_m;
        RegressionProblem inner = problem;
        int outer = 0;
        for (; outer < max_outer; ++outer) {
            // ||r|| + mu |xi|_1 and ||r||^2 + 2 mu ||r|| |xi|_1 share stationary
            // points at fixed ||r||.
            inner.mu = 2.0 * mu * sigma * sqrt_m;
            SparseSolution step = lasso_cd(inner, xi, 1e-13, 200000);
            xi = step.xi;
            out.iterations += step.iterations;
            const double r = (problem.design * xi - problem.target).norm();
            if (r <= 1e-14 * b_norm) {
                fail(ErrorKind::exact_fit, "sqrt-LASSO reached a zero residual; use mu = 0 least squares instead");
            }
            const double next = r / sqrt_m;
            const bool done = std::abs(next - sigma) <= tol * sigma;
            sigma = next;
            if (done) {
                out.converged = true;
                ++outer;
                break;
            }
        }
        if (!out.converged) out.warnings.push_back("sqrt-LASSO scale iteration did not settle");
        out.xi = std::move(xi);
    }
    const Vector r = problem.design * out.xi - problem.target;
    out.sigma = r.norm() / sqrt_m;
    out.support = support_of(out.xi);
    out.objective = sqrt_objective(problem, out.xi, mu);
    // Subgradient condition A^T r / ||r|| + mu sign(xi) = 0 on the support.
    if (r.norm() > 0.0) {
        const Vector g = problem.design.transpose() * r / r.norm();
        double worst = 0.0;
        for (Eigen::Index j = 0; j < out.xi.size(); ++j) {
            const double v = out.xi[j] != 0.0 ? std::abs(g[j] + mu * sign(out.xi[j]))
                                              : std::max(0.0, std::abs(g[j]) - mu);
            worst = std::max(worst, v);
        }
        out.kkt_residual = worst;
    }
    return out;
}

Vector least_squares(const Matrix& a, const Vector& b) {
    require(a.rows() == b.size(), "least squares: dimension mismatch");
    return a.colPivHouseholderQr().solve(b);
}

SparseSolution threshold_and_refit(const RegressionProblem& problem, const SparseSolution& solution, double rel_tol) {
    require(rel_tol > 0.0 && rel_tol < 1.0, "rel_tol must lie in (0, 1)");
    require(solution.xi.size() == problem.cols(), "solution length does not match the design");
    const double lead = solution.xi.lpNorm<Eigen::Infinity>();
    if (lead == 0.0) fail(ErrorKind::empty_model, "every coefficient is zero; no model survives pruning");
    std::vector<Eigen::Index> keep;
    for (Eigen::Index j = 0; j < solution.xi.size(); ++j) {
        if (std::abs(solution.xi[j]) >= rel_tol * lead) keep.push_back(j);
    }
    Matrix sub(problem.rows(), static_cast<Eigen::Index>(keep.size()));
    for (size_t k = 0; k < keep.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = problem.design.col(keep[k]);
    const Vector z = least_squares(sub, problem.target);

    SparseSolution out = solution;
    out.xi = Vector::Zero(problem.cols());
    for (size_t k = 0; k < keep.size(); ++k) out.xi[keep[k]] = z[static_cast<Eigen::Index>(k)];
    out.support = support_of(out.xi);
    if (out.support.empty()) fail(ErrorKind::empty_model, "refit produced an all-zero model");
    out.objective = lasso_objective(problem, out.xi);
    out.kkt_residual = kkt_check(problem, out.xi);
    return out;
}

}  // namespace surfpde
