#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

namespace surfpde {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class KernelFamily { matern_sobolev, gaussian };

/// Kernel family and parameters bound to an ambient dimension.
///
/// Matérn-Sobolev kernels are parameterised by the surface smoothness m; the
/// ambient order is tau = m + codim/2 and the Bessel order is nu = tau - d/2.
/// The kernel is used unnormalised: Phi(r) = r^nu K_nu(r).
struct KernelSpec {
    KernelFamily family = KernelFamily::matern_sobolev;
    int ambient_dim = 3;
    int codim = 1;
    int smoothness_m = 4;
    double sigma2 = 1.0;
    // Gaussian exponent uses |x-y|^2 when set, |x-y| otherwise.
    bool gaussian_squared = true;

    static KernelSpec matern(int ambient_dim, int smoothness_m, int codim = 1);
    static KernelSpec gaussian(int ambient_dim, double sigma2, bool squared = true);

    double tau() const { return smoothness_m + 0.5 * codim; }
    double nu() const { return tau() - 0.5 * ambient_dim; }

    /// Throws invalid-argument if tau <= d/2 (Matérn) or sigma2 <= 0 (Gaussian).
    void validate() const;
    /// True when the radial profile has a continuous gradient at r = 0.
    bool gradient_smooth_at_origin() const;
};

/// Modified Bessel function of the second kind K_nu(r) for integer or
/// half-integer nu >= 0 and r > 0.
double bessel_k(double nu, double r);

/// Radial profile phi(r) and phi'(r)/r, the latter being what every gradient
/// formula needs: grad_x Phi(x, y) = phi'(r)/r * (x - y).
struct RadialValue {
    double value;
    double derivative_over_r;
};

RadialValue radial(const KernelSpec& spec, double r);
double radial_value(const KernelSpec& spec, double r);

double kernel_value(const KernelSpec& spec, const Vector& x, const Vector& y);
Vector kernel_gradient_x(const KernelSpec& spec, const Vector& x, const Vector& y);

/// Kernel matrix K[i, j] = Phi(a_i, b_j) for row-major point sets.
Matrix kernel_matrix(const KernelSpec& spec, const Matrix& a, const Matrix& b);

/// Cholesky factorization of a symmetric positive definite Gram matrix with
/// adaptive diagonal jitter. The ladder is 0 then {1e-12, 1e-10, 1e-8}
/// times trace/N; beyond that an ill-conditioned error is thrown.
class GramFactorization {
public:
    GramFactorization() = default;
    explicit GramFactorization(const Matrix& gram);

    Vector solve(const Vector& rhs) const { return llt_.solve(rhs); }
    Matrix solve(const Matrix& rhs) const { return llt_.solve(rhs); }

    double jitter() const { return jitter_; }
    /// Reciprocal condition estimate from the Cholesky factor.
    double rcond() const { return rcond_; }
    Eigen::Index size() const { return llt_.rows(); }

private:
    Eigen::LLT<Matrix> llt_;
    double jitter_ = 0.0;
    double rcond_ = 0.0;
};

}  // namespace surfpde
