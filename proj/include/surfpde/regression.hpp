#pragma once

#include <optional>
#include <string>
#include <vector>

#include "surfpde/kernels.hpp"

namespace surfpde {

/// min ||A xi - b||_2^2 + mu ||xi||_1 (squared loss, unscaled penalty).
struct RegressionProblem {
    Matrix design;
    Vector target;
    /// Unset only for sqrt_lasso, which then uses the recommended default.
    std::optional<double> mu = 0.0;
    bool normalize_columns = false;

    Eigen::Index rows() const { return design.rows(); }
    Eigen::Index cols() const { return design.cols(); }
    void validate() const;
};

enum class RegressionMethod { lasso_cd, qp, sqrt_lasso, least_squares };
std::string to_string(RegressionMethod method);

struct SparseSolution {
    Vector xi;
    std::vector<int> support;
    double objective = 0.0;
    double kkt_residual = 0.0;
    int iterations = 0;
    RegressionMethod method = RegressionMethod::lasso_cd;
    bool converged = false;
    /// Penalty actually used (the sqrt-LASSO default or the fixed-point lasso
    /// penalty).
    double mu = 0.0;
    double sigma = 0.0;  // sqrt-LASSO scale ||r|| / sqrt(M)
    /// Sweeps in which the objective increased (should stay 0).
    int objective_increases = 0;
    std::vector<std::string> warnings;
};

/// Cyclic coordinate descent from xi = 0 with soft-threshold updates
/// xi_j <- S(A_j^T r_j, mu/2) / ||A_j||^2. Stops when the largest coordinate
/// change in a sweep is <= tol. A sign pattern that holds across two checks 25
/// sweeps apart is tried once as an exact active-set solution and accepted if
/// it is optimal. Internally the columns are scaled to unit norm with
/// penalties mu / ||A_j||, which leaves the objective unchanged.
SparseSolution lasso(const RegressionProblem& problem, double tol = 1e-12, int max_sweeps = 200000);

/// Constrained form min ||A xi - b||^2 + mu sum gamma s.t. -gamma <= xi <= gamma,
/// solved by accelerated projected gradient on (xi, gamma) followed by an
/// active-set polish. Only for n <= 64.
SparseSolution lasso_qp_oracle(const RegressionProblem& problem, double tol = 1e-12);

/// Recommended sqrt-LASSO penalty (1.1 / sqrt(M)) Q(1 - 0.05 / (2n)).
double sqrt_lasso_default_mu(Eigen::Index rows, Eigen::Index cols);

/// min ||A xi - b||_2 + mu ||xi||_1 by alternating scale estimation.
SparseSolution sqrt_lasso(const RegressionProblem& problem, double tol = 1e-8, int max_outer = 100);

/// max_j stationarity violation of the squared-loss LASSO at xi.
double kkt_check(const RegressionProblem& problem, const Vector& xi);

double lasso_objective(const RegressionProblem& problem, const Vector& xi);

/// Drops |xi_j| < rel_tol max|xi| and refits unpenalised least squares on the
/// survivors.
SparseSolution threshold_and_refit(const RegressionProblem& problem, const SparseSolution& solution,
                                   double rel_tol = 1e-4);

/// Plain least squares via column-pivoting QR.
Vector least_squares(const Matrix& a, const Vector& b);

}  // namespace surfpde
