#pragma once

#include <vector>

#include "surfpde/geometry.hpp"
#include "surfpde/kernels.hpp"

namespace surfpde {

/// Discrete extrinsic surface operators on a point cloud.
///
///   gram      Psi(X, X)
///   B_k       B_k[i, j] = P_k(x_i)^T grad_x Phi(x_i, x_j)
///   D_k       B_k Psi^{-1}: nodal values -> nodal surface-gradient component k
///   L         sum_k D_k D_k: nodal Laplace-Beltrami
///
/// Built once and shared read-only; the Gram factorization is cached.
class DiscreteOperators {
public:
    DiscreteOperators(PointCloud cloud, KernelSpec kernel);

    DiscreteOperators(const DiscreteOperators&) = delete;
    DiscreteOperators& operator=(const DiscreteOperators&) = delete;
    DiscreteOperators(DiscreteOperators&&) = default;
    DiscreteOperators& operator=(DiscreteOperators&&) = default;

    const PointCloud& cloud() const { return cloud_; }
    const KernelSpec& kernel() const { return kernel_; }
    Eigen::Index size() const { return cloud_.size(); }
    int dim() const { return cloud_.dim(); }

    const Matrix& gram() const { return gram_; }
    const GramFactorization& factorization() const { return factor_; }
    double jitter() const { return factor_.jitter(); }
    double rcond() const { return factor_.rcond(); }

    const std::vector<Matrix>& grad_kernel_mats() const { return grad_kernel_; }
    const std::vector<Matrix>& grad_nodal_mats() const { return grad_nodal_; }
    const Matrix& laplacian() const { return laplacian_; }

private:
    PointCloud cloud_;
    KernelSpec kernel_;
    Matrix gram_;
    GramFactorization factor_;
    std::vector<Matrix> grad_kernel_;
    std::vector<Matrix> grad_nodal_;
    Matrix laplacian_;
};

DiscreteOperators build_operators(const PointCloud& cloud, const KernelSpec& kernel);

/// Kernel interpolant u~ = sum_i kappa_i Psi(., x_i) of nodal samples.
struct Interpolant {
    const DiscreteOperators* ops = nullptr;
    Vector coefficients;
    Vector samples;
    /// max |Psi kappa - u*| / max |u*| (0 for zero samples).
    double residual = 0.0;
    bool ill_conditioned = false;

    /// u~ at the nodes, Psi kappa.
    Vector nodal_values() const;
};

/// Relative residual above which an interpolant is flagged ill-conditioned.
inline constexpr double kInterpolationTolerance = 1e-8;

Interpolant interpolate(const DiscreteOperators& ops, const Vector& samples);
double evaluate(const Interpolant& interp, const Vector& x);

/// d x N matrix; row k is D_k u.
Matrix surface_gradient_nodal(const DiscreteOperators& ops, const Vector& nodal_values);
Vector laplace_beltrami_nodal(const DiscreteOperators& ops, const Vector& nodal_values);
/// sum_k D_k (|grad u|^{p-2} (D_k u)), weights formed in log space.
Vector p_laplacian_nodal(const DiscreteOperators& ops, const Vector& nodal_values, double p);
Vector biharmonic_nodal(const DiscreteOperators& ops, const Vector& nodal_values);
Matrix grad_of_laplacian_nodal(const DiscreteOperators& ops, const Vector& nodal_values);

/// Throws unsupported-smoothness unless the kernel supports fourth-order
/// composites (m >= 4).
void require_fourth_order(const KernelSpec& kernel);

}  // namespace surfpde
