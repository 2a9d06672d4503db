#include "surfpde/solver.hpp"

#include <cmath>
#include <sstream>

#include "surfpde/errors.hpp"

namespace surfpde {
namespace {

bool is_pure_laplacian(const FeatureMap& map, const FeatureTerm& term) {
    if (term.degree != 1) return false;
    for (int c = 0; c < map.dim(); ++c) {
        if (term.alpha[static_cast<size_t>(c)] == 1) return map.channels[static_cast<size_t>(c)].kind == ChannelKind::laplacian;
    }
    return false;
}

// Product of channel powers with one factor of channel `skip` removed.
Vector monomial(const Matrix& z, const std::vector<int>& alpha, int skip = -1) {
    Vector v = Vector::Ones(z.rows());
    for (int c = 0; c < static_cast<int>(alpha.size()); ++c) {
        const int power = alpha[static_cast<size_t>(c)] - (c == skip ? 1 : 0);
        for (int a = 0; a < power; ++a) v.array() *= z.col(c).array();
    }
    return v;
}

Vector apply_terms(const SparseModel& model, const Matrix& z, bool skip_laplacian) {
    Vector out = Vector::Zero(z.rows());
    for (int j : model.support) {
        const auto& term = model.terms[static_cast<size_t>(j)];
        if (skip_laplacian && is_pure_laplacian(model.map, term)) continue;
        out.noalias() += model.coefficients[j] * monomial(z, term.alpha);
    }
    return out;
}

}  // namespace

ModelOperator::ModelOperator(const SparseModel& model, const DiscreteOperators& ops) : model_(&model), ops_(&ops) {
    require(model.coefficients.size() == static_cast<Eigen::Index>(model.terms.size()),
            "model coefficients and terms differ in length");
    model.map.validate();
    std::vector<bool> used(static_cast<size_t>(model.map.dim()), false);
    for (int j : model.support) {
        const auto& term = model.terms[static_cast<size_t>(j)];
        if (term.degree == 0) constant_ += model.coefficients[j];
        if (term.degree > 1) linear_ = false;
        for (int c = 0; c < model.map.dim(); ++c) {
            if (term.alpha[static_cast<size_t>(c)] > 0) used[static_cast<size_t>(c)] = true;
        }
    }
    const Eigen::Index n = ops.size();
    channel_mats_.resize(static_cast<size_t>(model.map.dim()));
    for (int c = 0; c < model.map.dim(); ++c) {
        if (!used[static_cast<size_t>(c)]) continue;
        const Channel& ch = model.map.channels[static_cast<size_t>(c)];
        Matrix& m = channel_mats_[static_cast<size_t>(c)];
        switch (ch.kind) {
            case ChannelKind::u: m = Matrix::Identity(n, n); break;
            case ChannelKind::grad: m = ops.grad_nodal_mats()[static_cast<size_t>(ch.component)]; break;
            case ChannelKind::laplacian: m = ops.laplacian(); break;
            case ChannelKind::grad_laplacian:
                require_fourth_order(ops.kernel());
                m = ops.grad_nodal_mats()[static_cast<size_t>(ch.component)] * ops.laplacian();
                break;
            case ChannelKind::bilaplacian:
                require_fourth_order(ops.kernel());
                m = ops.laplacian() * ops.laplacian();
                break;
            case ChannelKind::p_laplacian:
                // Not a polynomial in nodal operators; treated as nonlinear.
                linear_ = false;
                break;
        }
    }
}

Matrix ModelOperator::channels(const Vector& u) const { return evaluate_channels(*ops_, u, model_->map); }

Vector ModelOperator::apply_channels(const Matrix& z) const { return apply_terms(*model_, z, false); }

Vector ModelOperator::apply(const Vector& u) const { return apply_channels(channels(u)); }

Matrix ModelOperator::jacobian(const Vector& u) const {
    const Eigen::Index n = ops_->size();
    const Matrix z = channels(u);
    Matrix jac = Matrix::Zero(n, n);
    for (int j : model_->support) {
        const auto& term = model_->terms[static_cast<size_t>(j)];
        for (int c = 0; c < model_->map.dim(); ++c) {
            const int a = term.alpha[static_cast<size_t>(c)];
            if (a == 0) continue;
            if (model_->map.channels[static_cast<size_t>(c)].kind == ChannelKind::p_laplacian) {
                fail(ErrorKind::invalid_argument, "Jacobian of p-Laplacian terms is not supported");
            }
            const Vector scale = model_->coefficients[j] * a * monomial(z, term.alpha, c);
            jac.noalias() += scale.asDiagonal() * channel_mats_[static_cast<size_t>(c)];
        }
    }
    return jac;
}

StationaryResult solve_stationary(const SparseModel& model, const DiscreteOperators& ops, const Vector& forcing,
                                  double tol, int max_newton) {
    require(forcing.size() == ops.size(), "forcing length does not match the cloud");
    require(max_newton >= 1, "max_newton must be positive");
    const ModelOperator op(model, ops);
    const Eigen::Index n = ops.size();
    const double scale = std::max(1.0, forcing.lpNorm<Eigen::Infinity>());
    StationaryResult result;

    // Degree-1 truncation: sum_{|alpha|=1} xi_j M_c u = f - constant.
    Matrix linear = Matrix::Zero(n, n);
    SparseModel truncated = model;
    truncated.support.clear();
    for (int j : model.support) {
        if (model.terms[static_cast<size_t>(j)].degree <= 1) truncated.support.push_back(j);
    }
    if (!truncated.support.empty()) linear = ModelOperator(truncated, ops).jacobian(Vector::Zero(n));
    Eigen::PartialPivLU<Matrix> lu(linear);
    Vector u = lu.solve(forcing - Vector::Constant(n, op.constant()));
    if (!u.allFinite()) {
        if (op.linear()) fail(ErrorKind::ill_conditioned, "stationary collocation matrix is singular");
        u.setZero();
    }

    if (op.linear()) {
        // Iterative refinement against the assembled operator.
        for (int k = 0; k < 3; ++k) {
            const Vector r = op.apply(u) - forcing;
            result.residual = r.lpNorm<Eigen::Infinity>();
            if (result.residual <= tol * scale) break;
            u -= lu.solve(r);
        }
        result.residual = (op.apply(u) - forcing).lpNorm<Eigen::Infinity>();
        result.u = std::move(u);
        return result;
    }

    for (int it = 0; it < max_newton; ++it) {
        const Vector r = op.apply(u) - forcing;
        result.residual = r.lpNorm<Eigen::Infinity>();
        result.newton_iterations = it;
        if (!std::isfinite(result.residual)) break;
        if (result.residual <= tol * scale) {
            result.u = std::move(u);
            return result;
        }
        u -= Eigen::PartialPivLU<Matrix>(op.jacobian(u)).solve(r);
    }
    std::ostringstream msg;
    msg << "Newton did not converge in " << max_newton << " iterations (residual " << result.residual << ")";
    fail(ErrorKind::non_convergence, msg.str());
}

EvolutionResult solve_evolution(const SparseModel& model, const DiscreteOperators& ops, const Vector& initial,
                                const Matrix& forcing, double dt, int steps) {
    const Eigen::Index n = ops.size();
    require(dt > 0.0, "time step must be positive");
    require(steps >= 1, "need at least one time step");
    require(initial.size() == n && initial.allFinite(), "initial state must be finite with one value per node");
    require(forcing.rows() == steps + 1 && forcing.cols() == n, "forcing must hold (steps+1) x N values");
    const ModelOperator op(model, ops);
    const double a = model.linear_coefficient({ChannelKind::laplacian});

    EvolutionResult out;
    out.times = Vector::LinSpaced(steps + 1, 0.0, dt * steps);
    out.trajectory.resize(steps + 1, n);
    out.trajectory.row(0) = initial.transpose();

    auto explicit_part = [&](const Matrix& z) { return apply_terms(model, z, true); };
    auto check = [&](const Vector& u, int step) {
        if (!u.allFinite()) fail(ErrorKind::blow_up, "state became non-finite at step " + std::to_string(step));
    };
    auto factor = [&](double diag) {
        Matrix m = -a * ops.laplacian();
        m.diagonal().array() += diag;
        Eigen::PartialPivLU<Matrix> lu(m);
        ++out.factorizations;
        if (!lu.solve(Vector::Ones(n)).allFinite()) fail(ErrorKind::ill_conditioned, "implicit SBDF2 matrix is singular");
        return lu;
    };

    Matrix z_prev = op.channels(initial);
    Vector u_prev = initial;
    {
        const auto euler = factor(1.0 / dt);
        const Vector rhs = initial / dt + explicit_part(z_prev) + forcing.row(0).transpose();
        const Vector u1 = euler.solve(rhs);
        check(u1, 1);
        out.trajectory.row(1) = u1.transpose();
    }
    if (steps == 1) return out;

    const auto sbdf2 = factor(1.5 / dt);
    Vector u_cur = out.trajectory.row(1).transpose();
    Matrix z_cur = op.channels(u_cur);
    for (int j = 1; j < steps; ++j) {
        const Matrix z_ext = 2.0 * z_cur - z_prev;
        const Vector f_ext = (2.0 * forcing.row(j) - forcing.row(j - 1)).transpose();
        const Vector rhs = (4.0 * u_cur - u_prev) / (2.0 * dt) + explicit_part(z_ext) + f_ext;
        Vector u_next = sbdf2.solve(rhs);
        check(u_next, j + 1);
        out.trajectory.row(j + 1) = u_next.transpose();
        u_prev = std::move(u_cur);
        z_prev = std::move(z_cur);
        u_cur = std::move(u_next);
        z_cur = op.channels(u_cur);
    }
    return out;
}

double relative_l2(const Vector& predicted, const Vector& reference) {
    require(predicted.size() == reference.size(), "relative_l2: length mismatch");
    const double denom = reference.norm();
    require(denom > 0.0, "relative_l2: reference is identically zero");
    return (predicted - reference).norm() / denom;
}

}  // namespace surfpde
