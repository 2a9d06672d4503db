#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "surfpde/errors.hpp"
#include "surfpde/fields.hpp"
#include "surfpde/io.hpp"

using namespace surfpde;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::invalid_argument;
}

std::string message_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("point clouds round-trip bit for bit") {
    const PointCloud cloud = analytic_normals(torus(), implicit_surface_nodes(torus(), 50, 3));
    std::stringstream ss;
    write_point_cloud(ss, cloud);
    const PointCloud back = read_point_cloud(ss);
    CHECK((back.nodes() - cloud.nodes()).norm() == 0.0);
    CHECK((back.normals() - cloud.normals()).lpNorm<Eigen::Infinity>() <= 1e-15);
    std::stringstream plain;
    write_point_cloud(plain, PointCloud(circle_nodes(5).nodes()));
    CHECK(plain.str().rfind("x,y\n", 0) == 0);
    CHECK(!read_point_cloud(plain).has_normals());
}

TEST_CASE("point-cloud parse errors carry the line number") {
    std::istringstream bad_header("x,z\n1,2\n");
    CHECK(kind_of([&] { read_point_cloud(bad_header, "a.csv"); }) == ErrorKind::parse);
    std::istringstream bad_row("x,y\n1,2\n3,oops\n");
    CHECK(message_of([&] { read_point_cloud(bad_row, "b.csv"); }).find("b.csv:3") != std::string::npos);
    std::istringstream short_row("x,y,z\n1,2\n");
    CHECK(kind_of([&] { read_point_cloud(short_row); }) == ErrorKind::parse);
}

TEST_CASE("snapshots round-trip and are validated") {
    Snapshots s;
    s.times = Eigen::Vector3d(0.0, 0.5, 1.0);
    s.values = Matrix::Random(3, 4);
    s.forcing = Matrix::Random(3, 4);
    s.dt = 0.5;
    std::stringstream ss;
    write_snapshots(ss, s);
    const Snapshots back = read_snapshots(ss, 4);
    CHECK((back.values - s.values).norm() == 0.0);
    CHECK((back.forcing - s.forcing).norm() == 0.0);
    CHECK(back.dt == 0.5);

    std::istringstream missing("t,node_index,u,f\n0,0,1,0\n");
    CHECK(message_of([&] { read_snapshots(missing, 2); }).find("missing nodes") != std::string::npos);
    std::istringstream dup("t,node_index,u,f\n0,0,1,0\n0,0,1,0\n");
    CHECK(message_of([&] { read_snapshots(dup, 1); }).find("duplicate") != std::string::npos);
    std::istringstream range("t,node_index,u,f\n0,7,1,0\n");
    CHECK(kind_of([&] { read_snapshots(range, 2); }) == ErrorKind::parse);
    std::istringstream single("t,node_index,u,f\n0,1,2,3\n0,0,4,5\n");
    const Snapshots one = read_snapshots(single, 2);
    CHECK(one.values(0, 1) == 2.0);
    CHECK(one.forcing(0, 0) == 5.0);
}

TEST_CASE("models round-trip through the text format") {
    const PointCloud cloud = analytic_normals(unit_circle(), circle_nodes(30));
    const AmbientField field = field_by_name("circle-exp", 2);
    const Vector u = sample_field(field, cloud);
    const Vector f = -surface_laplacian_samples(unit_circle(), field, cloud) + u;
    RegressionConfig cfg;
    cfg.normalize_columns = true;
    const SparseModel m = discover_stationary(cloud, u, f, KernelSpec::matern(2, 6), 2, cfg);
    std::stringstream ss;
    write_model(ss, m);
    const SparseModel back = read_model(ss);
    CHECK(back.kind == m.kind);
    CHECK(back.ell == m.ell);
    CHECK(back.map.channels == m.map.channels);
    CHECK((back.coefficients - m.coefficients).norm() == 0.0);
    CHECK(back.support == m.support);
    CHECK(back.equation() == m.equation());
    CHECK(back.diagnostics.rows == m.diagnostics.rows);

    std::istringstream junk("surfpde-model 1\nkind stationary\nmap u laplacian\nfoo 1\n");
    CHECK(kind_of([&] { read_model(junk); }) == ErrorKind::parse);
    std::istringstream magic("model\n");
    CHECK(kind_of([&] { read_model(magic); }) == ErrorKind::parse);
}

TEST_CASE("coefficient tables and csv helpers") {
    CHECK(split_csv_line("a,b,,c") == std::vector<std::string>{"a", "b", "", "c"});
    CHECK(split_csv_line("a,") == std::vector<std::string>{"a", ""});
    CHECK(format_double(0.1) == "0.10000000000000001");
    const auto dir = std::filesystem::temp_directory_path() / "surfpde_io_test";
    std::filesystem::create_directories(dir);
    SparseModel m;
    m.map = FeatureMap::standard(2);
    m.ell = 1;
    m.terms = enumerate_terms(m.map, 1);
    m.coefficients = Vector::Zero(5);
    m.coefficients[1] = 2.5;
    write_coefficient_table((dir / "t.csv").string(), m);
    std::ifstream in(dir / "t.csv");
    std::string header, first, second;
    std::getline(in, header);
    std::getline(in, first);
    std::getline(in, second);
    CHECK(header == "label,coefficient,selected");
    CHECK(first == "1,0,0");
    CHECK(second == "u,2.5,1");
}
