#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "surfpde/features.hpp"
#include "surfpde/geometry.hpp"

namespace surfpde {

/// Closed-form ambient function with exact gradient and Hessian.
struct AmbientField {
    std::string name;
    int ambient_dim = 3;
    std::function<double(const Vector&)> value;
    std::function<Vector(const Vector&)> gradient;
    std::function<Matrix(const Vector&)> hessian;
};

template <int D, class F>
AmbientField make_field(std::string name, F f) {
    auto jet = [f](const Vector& x) {
        using J = Jet2<D>;
        if constexpr (D == 2) {
            return f(J::variable(x[0], 0), J::variable(x[1], 1));
        } else {
            return f(J::variable(x[0], 0), J::variable(x[1], 1), J::variable(x[2], 2));
        }
    };
    AmbientField field;
    field.name = std::move(name);
    field.ambient_dim = D;
    field.value = [f](const Vector& x) {
        if constexpr (D == 2) {
            return double(f(x[0], x[1]));
        } else {
            return double(f(x[0], x[1], x[2]));
        }
    };
    field.gradient = [jet](const Vector& x) -> Vector { return jet(x).g; };
    field.hessian = [jet](const Vector& x) -> Matrix { return jet(x).h; };
    return field;
}

/// Named test fields:
///   circle-exp     e^{x+y} (x^3 + y^4 + 1)           (R^2)
///   cubic          10xyz + 5xy + z
///   exp-sum        e^{x+y+z}
///   sin-product    sin x sin y sin z
///   z              z
///   one            1
AmbientField field_by_name(const std::string& name, int ambient_dim);

Vector sample_field(const AmbientField& field, const PointCloud& cloud);
/// Exact Delta_S of the field at the nodes of a cloud on `surface`.
Vector surface_laplacian_samples(const Surface& surface, const AmbientField& field, const PointCloud& cloud);
/// Exact P grad u at the nodes, d x N.
Matrix surface_gradient_samples(const Surface& surface, const AmbientField& field, const PointCloud& cloud);

/// u(x, t) = g(x) h(t).
struct SeparableField {
    AmbientField spatial;
    std::function<double(double)> time;
    std::function<double(double)> time_derivative;
};

SeparableField exp_decay_field(const AmbientField& spatial);  // h = e^{-t}
SeparableField sine_time_field(const AmbientField& spatial);  // h = sin t

/// Snapshots of u = g h at t_j = j dt, j = 0..steps, with forcing
/// f = du/dt - a Delta_S u - r u^2 so that du/dt = a Delta_S u + r u^2 + f.
Snapshots manufactured_snapshots(const Surface& surface, const PointCloud& cloud, const SeparableField& field,
                                 double a, double r, double dt, int steps);

/// i.i.d. Gaussian noise with standard deviation level * RMS(values).
Vector add_noise(const Vector& values, double level, std::uint64_t seed);
Matrix add_noise(const Matrix& values, double level, std::uint64_t seed);

/// Arc-length distance on the unit circle to node `source`.
Vector circle_geodesic_distance(const PointCloud& cloud, Eigen::Index source);
/// Great-circle distance on the unit sphere to the point `source`.
Vector sphere_geodesic_distance(const PointCloud& cloud, const Vector& source);
/// Distance on the default torus (R = 1, r = 1/3) to the nearer of its inner
/// and outer equator circles.
Vector torus_equator_distance(const PointCloud& cloud);

}  // namespace surfpde
