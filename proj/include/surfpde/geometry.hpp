#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "surfpde/jet.hpp"
#include "surfpde/kernels.hpp"

namespace surfpde {

/// Closed surface S = {x : F(x) = 0} in R^d. The implicit function and its
/// derivatives are optional so that point-cloud-only surfaces can be named.
struct Surface {
    std::string name;
    int ambient_dim = 3;
    int intrinsic_dim = 2;
    std::function<double(const Vector&)> implicit_fn;
    std::function<Vector(const Vector&)> implicit_gradient;
    std::function<Matrix(const Vector&)> implicit_hessian;
    // Axis-aligned box that contains the surface; used for candidate sampling.
    Vector box_lo;
    Vector box_hi;

    int codim() const { return ambient_dim - intrinsic_dim; }
    bool has_implicit() const { return static_cast<bool>(implicit_fn); }

    double value(const Vector& x) const;
    /// Analytic gradient when present, central differences otherwise.
    Vector gradient(const Vector& x) const;
    Matrix hessian(const Vector& x) const;
    /// Total curvature div(n) for n = grad F / |grad F|.
    double mean_curvature_sum(const Vector& x) const;
};

/// Builds a Surface from a generic functor `f(auto x, auto y[, auto z])`,
/// differentiating it exactly with second-order jets.
template <int D, class F>
Surface make_implicit_surface(std::string name, F f, Vector box_lo, Vector box_hi) {
    static_assert(D == 2 || D == 3, "surfaces live in R^2 or R^3");
    auto eval = [f](const Vector& x) {
        using J = Jet2<D>;
        if constexpr (D == 2) {
            return f(J::variable(x[0], 0), J::variable(x[1], 1));
        } else {
            return f(J::variable(x[0], 0), J::variable(x[1], 1), J::variable(x[2], 2));
        }
    };
    Surface s;
    s.name = std::move(name);
    s.ambient_dim = D;
    s.intrinsic_dim = D - 1;
    s.implicit_fn = [f](const Vector& x) {
        if constexpr (D == 2) {
            return double(f(x[0], x[1]));
        } else {
            return double(f(x[0], x[1], x[2]));
        }
    };
    s.implicit_gradient = [eval](const Vector& x) -> Vector { return eval(x).g; };
    s.implicit_hessian = [eval](const Vector& x) -> Matrix { return eval(x).h; };
    s.box_lo = std::move(box_lo);
    s.box_hi = std::move(box_hi);
    return s;
}

Surface unit_circle();
Surface unit_sphere();
/// (x^2+y^2+z^2+1-1/9)^2 - 4(x^2+y^2) = 0: tube radius 1/3 around the unit circle.
Surface torus();
Surface cyclide();
Surface bretzel2();
/// Looks up one of: circle, sphere, torus, cyclide, bretzel2.
Surface surface_by_name(const std::string& name);

/// N surface nodes in R^d with optional unit normals and the tangent-space
/// projections P_i = I - n_i n_i^T derived from them.
class PointCloud {
public:
    PointCloud() = default;
    /// Validates that nodes are finite and pairwise distinct.
    explicit PointCloud(Matrix nodes, std::uint64_t seed = 0);

    /// Copy with the given normals (normalised to unit length) and projections.
    PointCloud with_normals(const Matrix& normals) const;

    Eigen::Index size() const { return nodes_.rows(); }
    int dim() const { return static_cast<int>(nodes_.cols()); }
    const Matrix& nodes() const { return nodes_; }
    Vector node(Eigen::Index i) const { return nodes_.row(i).transpose(); }

    bool has_normals() const { return normals_.has_value(); }
    const Matrix& normals() const;
    Vector normal(Eigen::Index i) const { return normals().row(i).transpose(); }
    const Matrix& projection(Eigen::Index i) const;

    /// Minimum pairwise node distance, the cheap spacing proxy.
    double fill_distance_estimate() const { return min_spacing_; }
    std::uint64_t seed() const { return seed_; }

private:
    Matrix nodes_;
    std::optional<Matrix> normals_;
    std::vector<Matrix> projections_;
    double min_spacing_ = 0.0;
    std::uint64_t seed_ = 0;
};

double min_pairwise_distance(const Matrix& nodes);

/// Fill distance sup_{y in S} min_i |y - x_i| estimated over a probe set.
double fill_distance(const Matrix& nodes, const Matrix& probes);

/// Equally spaced nodes (cos 2 pi i/N, sin 2 pi i/N), i = 0..N-1.
PointCloud circle_nodes(int n);
/// Fibonacci lattice z_i = 1 - (2i+1)/N with golden-angle longitudes.
PointCloud sphere_nodes(int n);
/// Seeded box sampling, Newton projection onto F = 0, then farthest-point
/// thinning to N nodes. Deterministic for a fixed seed.
PointCloud implicit_surface_nodes(const Surface& surface, int n, std::uint64_t seed);

/// Normals grad F / |grad F|, globally oriented so that they point away from
/// the node centroid on average.
PointCloud analytic_normals(const Surface& surface, const PointCloud& cloud);

/// Local PCA normals over the k nearest neighbours with sign propagation
/// along the neighbour graph.
PointCloud rough_normals(const PointCloud& cloud, int k = 12);

/// Level-set function s(x) fitted at on-surface (0), inner (-1) and outer (+1)
/// offset centres.
struct LevelSetModel {
    Matrix centers;        // 3N x d: on-surface, inner, outer
    Vector coefficients;   // alpha, beta, zeta stacked
    KernelSpec kernel;
    double offset = 0.0;
    double jitter = 0.0;
    double rcond = 0.0;

    double evaluate(const Vector& x) const;
    Vector gradient(const Vector& x) const;
};

/// Default offset: half the minimum node spacing.
double default_extension_offset(const PointCloud& cloud);

/// Refines normals as grad s / |grad s| at the nodes; orientation follows the
/// rough normals.
std::pair<LevelSetModel, PointCloud> normal_extension(const PointCloud& cloud, const PointCloud& rough,
                                                      double delta, const KernelSpec& kernel);

/// Surface Laplacian of an ambient function from its gradient and Hessian at
/// a surface point: tr(P H) - div(n) (n . grad u).
double surface_laplacian_from_derivatives(const Surface& surface, const Vector& x, const Vector& grad,
                                          const Matrix& hess);

}  // namespace surfpde
