#include <doctest.h>

#include <cmath>
#include <random>

#include "surfpde/errors.hpp"
#include "surfpde/fields.hpp"
#include "surfpde/geometry.hpp"

using namespace surfpde;

TEST_CASE("tangent projections are idempotent, annihilate the normal and have trace d-1") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n01;
    for (int d : {2, 3}) {
        Matrix nodes(100, d), normals(100, d);
        for (Eigen::Index i = 0; i < nodes.size(); ++i) {
            nodes.data()[i] = n01(rng);
            normals.data()[i] = n01(rng);
        }
        const PointCloud cloud = PointCloud(nodes).with_normals(normals);
        for (Eigen::Index i = 0; i < 100; ++i) {
            const Matrix& p = cloud.projection(i);
            CHECK((p * p - p).lpNorm<Eigen::Infinity>() < 1e-12);
            CHECK((p * cloud.normal(i)).lpNorm<Eigen::Infinity>() < 1e-12);
            CHECK(std::abs(p.trace() - (d - 1)) < 1e-12);
            CHECK(std::abs(cloud.normal(i).norm() - 1.0) < 1e-14);
        }
    }
}

TEST_CASE("point clouds reject duplicates and non-finite nodes") {
    Matrix dup(3, 2);
    dup << 0, 0, 1, 0, 0, 0;
    CHECK_THROWS_AS(PointCloud{dup}, Error);
    Matrix bad(2, 2);
    bad << 0, 0, NAN, 1;
    CHECK_THROWS_AS(PointCloud{bad}, Error);
}

TEST_CASE("deterministic circle and sphere nodes") {
    const PointCloud c = circle_nodes(100);
    CHECK(c.size() == 100);
    CHECK(c.nodes()(15, 0) == doctest::Approx(std::cos(2.0 * M_PI * 15 / 100)));
    CHECK(c.nodes()(15, 1) == doctest::Approx(std::sin(2.0 * M_PI * 15 / 100)));
    CHECK(c.fill_distance_estimate() == doctest::Approx(2.0 * std::sin(M_PI / 100)));
    const PointCloud s = sphere_nodes(500);
    for (Eigen::Index i = 0; i < s.size(); ++i) CHECK(std::abs(s.node(i).norm() - 1.0) < 1e-14);
    CHECK(s.nodes()(0, 2) == doctest::Approx(1.0 - 1.0 / 500));
}

TEST_CASE("implicit surface sampling lands on the surface and is reproducible") {
    const Surface t = torus();
    const PointCloud a = implicit_surface_nodes(t, 300, 5);
    const PointCloud b = implicit_surface_nodes(t, 300, 5);
    CHECK(a.size() == 300);
    CHECK((a.nodes() - b.nodes()).norm() == 0.0);
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        const Vector x = a.node(i);
        // distance to the tube centre circle is the tube radius
        CHECK(std::hypot(std::hypot(x[0], x[1]) - 1.0, x[2]) == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
    }
    const PointCloud c = implicit_surface_nodes(t, 300, 6);
    CHECK((a.nodes() - c.nodes()).norm() > 0.0);
}

TEST_CASE("analytic normals point outward on the sphere") {
    const PointCloud s = analytic_normals(unit_sphere(), sphere_nodes(200));
    for (Eigen::Index i = 0; i < s.size(); ++i) CHECK((s.normal(i) - s.node(i)).norm() < 1e-12);
}

TEST_CASE("rough and extension normals approximate the sphere normals") {
    const PointCloud cloud = sphere_nodes(400);
    const PointCloud rough = rough_normals(cloud);
    double rough_err = 0.0;
    for (Eigen::Index i = 0; i < cloud.size(); ++i) {
        rough_err = std::max(rough_err, (rough.normal(i) - cloud.node(i)).norm());
    }
    CHECK(rough_err < 0.1);
    const auto [level, refined] =
        normal_extension(cloud, rough, default_extension_offset(cloud), KernelSpec::matern(3, 4));
    double err = 0.0;
    for (Eigen::Index i = 0; i < cloud.size(); ++i) err = std::max(err, (refined.normal(i) - cloud.node(i)).norm());
    CHECK(err < rough_err);
    CHECK(err < 1e-2);
    CHECK(std::abs(level.evaluate(cloud.node(3))) < 1e-6);
}

TEST_CASE("surface Laplacian from ambient derivatives") {
    // Delta_S z = -2z on the unit sphere; Delta_S x = -x on the unit circle.
    const Surface s = unit_sphere();
    const AmbientField z = field_by_name("z", 3);
    for (Vector x : {Vector(Eigen::Vector3d(0.0, 0.6, 0.8)), Vector(Eigen::Vector3d(1.0, 0.0, 0.0))}) {
        CHECK(surface_laplacian_from_derivatives(s, x, z.gradient(x), z.hessian(x)) ==
              doctest::Approx(-2.0 * x[2]).scale(1.0));
    }
    const Surface c = unit_circle();
    const AmbientField f = make_field<2>("x", [](auto x, auto) { return x; });
    const Vector p = Eigen::Vector2d(0.6, 0.8);
    CHECK(surface_laplacian_from_derivatives(c, p, f.gradient(p), f.hessian(p)) == doctest::Approx(-0.6));
}

TEST_CASE("implicit surfaces vanish on their samples and name lookup works") {
    for (const std::string name : {"circle", "sphere", "torus", "cyclide", "bretzel2"}) {
        const Surface s = surface_by_name(name);
        CHECK(s.name == name);
    }
    CHECK_THROWS_AS(surface_by_name("klein"), Error);
    CHECK(torus().value(Eigen::Vector3d(4.0 / 3.0, 0.0, 0.0)) == doctest::Approx(0.0).scale(1.0));
}
