#include "surfpde/operators.hpp"

#include <cmath>
#include <sstream>

#include "surfpde/errors.hpp"

namespace surfpde {

DiscreteOperators::DiscreteOperators(PointCloud cloud, KernelSpec kernel)
    : cloud_(std::move(cloud)), kernel_(kernel) {
    require(cloud_.has_normals(), "build_operators needs normals and projections on the cloud");
    require(kernel_.family == KernelFamily::matern_sobolev, "build_operators needs a Matern-Sobolev kernel");
    require(kernel_.ambient_dim == cloud_.dim(), "kernel dimension does not match the cloud");
    kernel_.validate();
    if (!kernel_.gradient_smooth_at_origin()) {
        fail(ErrorKind::unsupported_smoothness, "surface gradients need nu = tau - d/2 > 1");
    }

    const Eigen::Index n = cloud_.size();
    const int d = cloud_.dim();
    const Matrix& x = cloud_.nodes();

    gram_.resize(n, n);
    grad_kernel_.assign(static_cast<size_t>(d), Matrix(n, n));
    const double diag = radial_value(kernel_, 0.0);
    Vector diff(d), proj_i(d), proj_j(d);
    for (Eigen::Index j = 0; j < n; ++j) {
        gram_(j, j) = diag;
        for (int k = 0; k < d; ++k) grad_kernel_[static_cast<size_t>(k)](j, j) = 0.0;
        for (Eigen::Index i = 0; i < j; ++i) {
            diff = (x.row(i) - x.row(j)).transpose();
            const RadialValue rv = radial(kernel_, diff.norm());
            gram_(i, j) = rv.value;
            gram_(j, i) = rv.value;
            proj_i.noalias() = cloud_.projection(i) * diff;
            proj_j.noalias() = cloud_.projection(j) * diff;
            for (int k = 0; k < d; ++k) {
                grad_kernel_[static_cast<size_t>(k)](i, j) = rv.derivative_over_r * proj_i[k];
                grad_kernel_[static_cast<size_t>(k)](j, i) = -rv.derivative_over_r * proj_j[k];
            }
        }
    }

    factor_ = GramFactorization(gram_);

    grad_nodal_.reserve(static_cast<size_t>(d));
    for (int k = 0; k < d; ++k) {
        // D_k = B_k Psi^{-1} = (Psi^{-1} B_k^T)^T for symmetric Psi.
        grad_nodal_.push_back(factor_.solve(Matrix(grad_kernel_[static_cast<size_t>(k)].transpose())).transpose());
    }
    laplacian_ = Matrix::Zero(n, n);
    for (int k = 0; k < d; ++k) {
        laplacian_.noalias() += grad_nodal_[static_cast<size_t>(k)] * grad_nodal_[static_cast<size_t>(k)];
    }
}

DiscreteOperators build_operators(const PointCloud& cloud, const KernelSpec& kernel) {
    return DiscreteOperators(cloud, kernel);
}

Vector Interpolant::nodal_values() const { return ops->gram() * coefficients; }

Interpolant interpolate(const DiscreteOperators& ops, const Vector& samples) {
    require(samples.size() == ops.size(), "interpolate: sample count does not match the cloud");
    require(samples.allFinite(), "interpolate: samples must be finite");
    Interpolant out;
    out.ops = &ops;
    out.samples = samples;
    const double scale = samples.lpNorm<Eigen::Infinity>();
    if (scale == 0.0) {
        out.coefficients = Vector::Zero(samples.size());
        return out;
    }
    out.coefficients = ops.factorization().solve(samples);
    out.residual = (ops.gram() * out.coefficients - samples).lpNorm<Eigen::Infinity>() / scale;
    out.ill_conditioned = !(out.residual <= kInterpolationTolerance);
    return out;
}

double evaluate(const Interpolant& interp, const Vector& x) {
    const auto& ops = *interp.ops;
    const Matrix& nodes = ops.cloud().nodes();
    double value = 0.0;
    for (Eigen::Index i = 0; i < nodes.rows(); ++i) {
        value += interp.coefficients[i] * radial_value(ops.kernel(), (x - nodes.row(i).transpose()).norm());
    }
    return value;
}

Matrix surface_gradient_nodal(const DiscreteOperators& ops, const Vector& nodal_values) {
    require(nodal_values.size() == ops.size(), "surface_gradient_nodal: length mismatch");
    Matrix g(ops.dim(), ops.size());
    for (int k = 0; k < ops.dim(); ++k) {
        g.row(k) = (ops.grad_nodal_mats()[static_cast<size_t>(k)] * nodal_values).transpose();
    }
    return g;
}

Vector laplace_beltrami_nodal(const DiscreteOperators& ops, const Vector& nodal_values) {
    require(nodal_values.size() == ops.size(), "laplace_beltrami_nodal: length mismatch");
    return ops.laplacian() * nodal_values;
}

Vector p_laplacian_nodal(const DiscreteOperators& ops, const Vector& nodal_values, double p) {
    require(p >= 2.0, "p_laplacian_nodal requires p >= 2");
    require(nodal_values.size() == ops.size(), "p_laplacian_nodal: length mismatch");
    const Matrix g = surface_gradient_nodal(ops, nodal_values);
    Vector weight(ops.size());
    if (p == 2.0) {
        weight.setOnes();
    } else {
        const double half_exponent = 0.5 * (p - 2.0);
        for (Eigen::Index i = 0; i < ops.size(); ++i) {
            const double s = g.col(i).squaredNorm();
            weight[i] = s == 0.0 ? 0.0 : std::exp(half_exponent * std::log(s));
        }
    }
    Vector out = Vector::Zero(ops.size());
    for (int k = 0; k < ops.dim(); ++k) {
        const Vector flux = weight.cwiseProduct(g.row(k).transpose());
        out.noalias() += ops.grad_nodal_mats()[static_cast<size_t>(k)] * flux;
    }
    if (!out.allFinite()) {
        std::ostringstream msg;
        msg << "p-Laplacian overflowed for p = " << p;
        fail(ErrorKind::non_finite, msg.str());
    }
    return out;
}

void require_fourth_order(const KernelSpec& kernel) {
    if (kernel.family != KernelFamily::matern_sobolev || kernel.smoothness_m < 4) {
        fail(ErrorKind::unsupported_smoothness, "fourth-order surface operators need kernel smoothness m >= 4");
    }
}

Vector biharmonic_nodal(const DiscreteOperators& ops, const Vector& nodal_values) {
    require_fourth_order(ops.kernel());
    return ops.laplacian() * laplace_beltrami_nodal(ops, nodal_values);
}

Matrix grad_of_laplacian_nodal(const DiscreteOperators& ops, const Vector& nodal_values) {
    require_fourth_order(ops.kernel());
    return surface_gradient_nodal(ops, laplace_beltrami_nodal(ops, nodal_values));
}

}  // namespace surfpde
