#pragma once

#include "surfpde/discovery.hpp"

namespace surfpde {

/// Nodal model operator M(u) = sum_j xi_j p_j(z(u)) and its Jacobian, with the
/// channels z taken from the nodal operator matrices.
class ModelOperator {
public:
    ModelOperator(const SparseModel& model, const DiscreteOperators& ops);

    Vector apply(const Vector& u) const;
    /// Channels are given rather than recomputed (used for extrapolated states).
    Vector apply_channels(const Matrix& channels) const;
    Matrix jacobian(const Vector& u) const;
    Matrix channels(const Vector& u) const;
    bool linear() const { return linear_; }
    /// Constant-term coefficient.
    double constant() const { return constant_; }

private:
    const SparseModel* model_;
    const DiscreteOperators* ops_;
    bool linear_ = true;
    double constant_ = 0.0;
    std::vector<Matrix> channel_mats_;  // d z_c / d u for each channel
};

struct StationaryResult {
    Vector u;
    double residual = 0.0;  // ||M(u) - f||_inf
    int newton_iterations = 0;
};

/// Solves M(u) = f at the nodes. Linear models are solved directly; otherwise
/// Newton from the solution of the degree-1 truncation.
StationaryResult solve_stationary(const SparseModel& model, const DiscreteOperators& ops, const Vector& forcing,
                                  double tol = 1e-10, int max_newton = 50);

struct EvolutionResult {
    Vector times;
    Matrix trajectory;  // (steps+1) x N
    /// Factorizations of implicit matrices performed (bootstrap + SBDF2).
    int factorizations = 0;
};

/// du/dt = a Delta u + E(u) + f with the Laplacian implicit and E treated by
/// SBDF2 extrapolation; one IMEX-Euler bootstrap step. `forcing` holds
/// f(X, t_j) for j = 0..steps.
EvolutionResult solve_evolution(const SparseModel& model, const DiscreteOperators& ops, const Vector& initial,
                                const Matrix& forcing, double dt, int steps);

/// sqrt(sum (p - r)^2) / sqrt(sum r^2).
double relative_l2(const Vector& predicted, const Vector& reference);

}  // namespace surfpde
