#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "surfpde/features.hpp"
#include "surfpde/regression.hpp"

namespace surfpde {

enum class ModelKind { stationary, evolution, eikonal, biharmonic };
std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

/// Sparse-regression settings shared by the pipelines.
struct RegressionConfig {
    RegressionMethod method = RegressionMethod::lasso_cd;
    std::optional<double> mu = 0.01;
    double tol = 1e-12;
    int max_sweeps = 200000;
    bool normalize_columns = false;
    /// Pruning threshold relative to the largest coefficient; 0 disables the
    /// threshold-and-refit stage.
    double prune_rel_tol = 1e-4;
};

struct SourceTerm {
    int node = 0;
    Vector location;
    double amplitude = 0.0;
};

struct ModelDiagnostics {
    double kkt_residual = 0.0;
    double jitter = 0.0;
    double rcond = 0.0;
    double interpolation_residual = 0.0;
    double runtime_seconds = 0.0;
    std::uint64_t seed = 0;
    Eigen::Index rows = 0;
    int iterations = 0;
    std::vector<std::string> warnings;
};

struct SparseModel {
    ModelKind kind = ModelKind::stationary;
    FeatureMap map;
    int ell = 0;
    std::vector<double> p_values;
    std::vector<FeatureTerm> terms;
    Vector coefficients;
    /// Solver output before pruning.
    Vector raw_coefficients;
    std::vector<int> support;

    RegressionMethod method = RegressionMethod::lasso_cd;
    double mu = 0.0;
    double prune_rel_tol = 0.0;
    double tol = 0.0;
    ModelDiagnostics diagnostics;

    // Eikonal step 2.
    std::vector<SourceTerm> sources;
    double source_mu = 0.0;
    double source_sigma2 = 0.0;
    double residual_norm = 0.0;
    double source_fit_residual_norm = 0.0;

    /// Index of the term with multi-index alpha, or -1.
    int term_index(const std::vector<int>& alpha) const;
    /// Coefficient of the degree-1 term for the given channel (0 if absent).
    double linear_coefficient(const Channel& channel) const;
    std::vector<std::string> support_labels() const;
    /// One-line equation, terms by |coefficient| descending, 4 decimals.
    std::string equation() const;
};

/// Operators plus an interpolant of the samples; reused by the pipelines.
SparseModel discover_stationary(const DiscreteOperators& ops, const Vector& samples, const Vector& forcing, int ell,
                                const RegressionConfig& config);
SparseModel discover_stationary(const PointCloud& cloud, const Vector& samples, const Vector& forcing,
                                const KernelSpec& kernel, int ell, const RegressionConfig& config);

/// Stacks SBDF2 rows for j = 1..M-1 with target lhs - forcing, for the model
/// du/dt = sum xi_j p_j(z) + f.
SparseModel discover_evolution(const DiscreteOperators& ops, const Snapshots& snaps, int ell,
                               const RegressionConfig& config);
SparseModel discover_evolution(const PointCloud& cloud, const Snapshots& snaps, const KernelSpec& kernel, int ell,
                               const RegressionConfig& config);

struct EikonalConfig {
    std::vector<double> p_values{2, 5, 50, 100, 200, 300, 400, 500, 600, 700, 800, 900, 1000};
    RegressionConfig step1{RegressionMethod::lasso_cd, 1e-3, 1e-12, 200000, false, 0.0};
    double mu2 = 1e-3;
    double sigma2 = 1.0;
    bool gaussian_squared = true;
    /// Sweep cap for the N x N source fit; each sweep costs O(N^2).
    int max_sweeps2 = 2000;
};

/// Step 1: LASSO of [u, Delta^p u, ...] against 1. Step 2: LASSO fit of the
/// residual by Gaussians centred at the nodes; nonzero weights are reported
/// as sources ranked by |eta|.
SparseModel discover_eikonal(const DiscreteOperators& ops, const Vector& samples, const EikonalConfig& config);
SparseModel discover_eikonal(const PointCloud& cloud, const Vector& samples, const KernelSpec& kernel,
                             const EikonalConfig& config);

/// Extended map (dim 2d + 3) to degree ell with target u(X).
SparseModel discover_biharmonic(const DiscreteOperators& ops, const Vector& samples, int ell,
                                const RegressionConfig& config);
SparseModel discover_biharmonic(const PointCloud& cloud, const Vector& samples, const KernelSpec& kernel, int ell,
                                const RegressionConfig& config);

struct RegressionOutcome {
    SparseSolution raw;
    SparseSolution final;  // after threshold-and-refit, or raw when disabled
};

/// Runs the configured solver on a regression problem and prunes.
RegressionOutcome solve_regression(const Matrix& design, const Vector& target, const RegressionConfig& config);

}  // namespace surfpde
