#include "surfpde/fields.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "surfpde/errors.hpp"

namespace surfpde {

AmbientField field_by_name(const std::string& name, int ambient_dim) {
    require(ambient_dim == 2 || ambient_dim == 3, "fields live in R^2 or R^3");
    if (ambient_dim == 2) {
        if (name == "circle-exp") {
            return make_field<2>(name, [](auto x, auto y) { return exp(x + y) * (x * x * x + pow(y, 4) + 1.0); });
        }
        if (name == "one") return make_field<2>(name, [](auto x, auto) { return 0.0 * x + 1.0; });
    } else {
        if (name == "cubic") {
            return make_field<3>(name, [](auto x, auto y, auto z) { return 10.0 * x * y * z + 5.0 * x * y + z; });
        }
        if (name == "exp-sum") return make_field<3>(name, [](auto x, auto y, auto z) { return exp(x + y + z); });
        if (name == "sin-product") {
            return make_field<3>(name, [](auto x, auto y, auto z) { return sin(x) * sin(y) * sin(z); });
        }
        if (name == "z") return make_field<3>(name, [](auto, auto, auto z) { return z; });
        if (name == "one") return make_field<3>(name, [](auto x, auto, auto) { return 0.0 * x + 1.0; });
    }
    fail(ErrorKind::invalid_argument, "unknown field '" + name + "' in dimension " + std::to_string(ambient_dim));
}

Vector sample_field(const AmbientField& field, const PointCloud& cloud) {
    require(field.ambient_dim == cloud.dim(), "field and cloud dimensions differ");
    Vector out(cloud.size());
    for (Eigen::Index i = 0; i < cloud.size(); ++i) out[i] = field.value(cloud.node(i));
    return out;
}

Vector surface_laplacian_samples(const Surface& surface, const AmbientField& field, const PointCloud& cloud) {
    require(field.ambient_dim == cloud.dim(), "field and cloud dimensions differ");
    Vector out(cloud.size());
    for (Eigen::Index i = 0; i < cloud.size(); ++i) {
        const Vector x = cloud.node(i);
        out[i] = surface_laplacian_from_derivatives(surface, x, field.gradient(x), field.hessian(x));
    }
    return out;
}

Matrix surface_gradient_samples(const Surface& surface, const AmbientField& field, const PointCloud& cloud) {
    Matrix out(cloud.dim(), cloud.size());
    for (Eigen::Index i = 0; i < cloud.size(); ++i) {
        const Vector x = cloud.node(i);
        const Vector n = surface.gradient(x).normalized();
        const Vector g = field.gradient(x);
        out.col(i) = g - n * n.dot(g);
    }
    return out;
}

SeparableField exp_decay_field(const AmbientField& spatial) {
    return {spatial, [](double t) { return std::exp(-t); }, [](double t) { return -std::exp(-t); }};
}

SeparableField sine_time_field(const AmbientField& spatial) {
    return {spatial, [](double t) { return std::sin(t); }, [](double t) { return std::cos(t); }};
}

Snapshots manufactured_snapshots(const Surface& surface, const PointCloud& cloud, const SeparableField& field,
                                 double a, double r, double dt, int steps) {
    require(dt > 0.0 && steps >= 1, "snapshots need dt > 0 and at least one step");
    const Vector g = sample_field(field.spatial, cloud);
    const Vector lap = surface_laplacian_samples(surface, field.spatial, cloud);
    Snapshots s;
    s.dt = dt;
    s.times.resize(steps + 1);
    s.values.resize(steps + 1, cloud.size());
    s.forcing.resize(steps + 1, cloud.size());
    for (int j = 0; j <= steps; ++j) {
        const double t = j * dt;
        const double h = field.time(t), dh = field.time_derivative(t);
        s.times[j] = t;
        s.values.row(j) = (h * g).transpose();
        s.forcing.row(j) = (dh * g - a * h * lap - r * h * h * g.cwiseProduct(g)).transpose();
    }
    return s;
}

Vector add_noise(const Vector& values, double level, std::uint64_t seed) {
    require(level >= 0.0, "noise level must be non-negative");
    if (level == 0.0) return values;
    const double rms = std::sqrt(values.squaredNorm() / static_cast<double>(values.size()));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, level * rms);
    Vector out = values;
    for (Eigen::Index i = 0; i < out.size(); ++i) out[i] += normal(rng);
    return out;
}

Matrix add_noise(const Matrix& values, double level, std::uint64_t seed) {
    require(level >= 0.0, "noise level must be non-negative");
    if (level == 0.0) return values;
    const double rms = std::sqrt(values.squaredNorm() / static_cast<double>(values.size()));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, level * rms);
    Matrix out = values;
    // Row-major visiting order so snapshots are perturbed level by level.
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        for (Eigen::Index j = 0; j < out.cols(); ++j) out(i, j) += normal(rng);
    }
    return out;
}

Vector circle_geodesic_distance(const PointCloud& cloud, Eigen::Index source) {
    require(cloud.dim() == 2, "circle distance needs planar nodes");
    require(source >= 0 && source < cloud.size(), "source node out of range");
    const double ts = std::atan2(cloud.nodes()(source, 1), cloud.nodes()(source, 0));
    Vector out(cloud.size());
    for (Eigen::Index i = 0; i < cloud.size(); ++i) {
        double d = std::abs(std::atan2(cloud.nodes()(i, 1), cloud.nodes()(i, 0)) - ts);
        if (d > std::numbers::pi) d = 2.0 * std::numbers::pi - d;
        out[i] = i == source ? 0.0 : d;
    }
    return out;
}

Vector sphere_geodesic_distance(const PointCloud& cloud, const Vector& source) {
    require(cloud.dim() == 3 && source.size() == 3, "sphere distance needs points in R^3");
    const Eigen::Vector3d s = source.normalized();
    Vector out(cloud.size());
    for (Eigen::Index i = 0; i < cloud.size(); ++i) {
        const Eigen::Vector3d x = cloud.node(i).normalized();
        // atan2 form stays accurate near the source.
        out[i] = std::atan2(x.cross(s).norm(), x.dot(s));
    }
    return out;
}

Vector torus_equator_distance(const PointCloud& cloud) {
    require(cloud.dim() == 3, "torus distance needs points in R^3");
    constexpr double tube = 1.0 / 3.0;
    Vector out(cloud.size());
    for (Eigen::Index i = 0; i < cloud.size(); ++i) {
        const Vector x = cloud.node(i);
        const double rho = std::hypot(x[0], x[1]);
        const double phi = std::atan2(x[2], rho - 1.0);  // 0 on the outer equator
        out[i] = tube * std::min(std::abs(phi), std::numbers::pi - std::abs(phi));
    }
    return out;
}

}  // namespace surfpde
