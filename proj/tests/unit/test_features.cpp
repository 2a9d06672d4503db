#include <doctest.h>

#include <map>
#include <set>

#include "surfpde/errors.hpp"
#include "surfpde/features.hpp"
#include "surfpde/fields.hpp"

using namespace surfpde;

namespace {

// Brute force: every alpha in {0..ell}^dim with |alpha| <= ell.
int brute_count(int dim, int ell) {
    int count = 0;
    std::vector<int> a(static_cast<size_t>(dim), 0);
    while (true) {
        int s = 0;
        for (int v : a) s += v;
        if (s <= ell) ++count;
        size_t k = 0;
        while (k < a.size() && ++a[k] > ell) a[k++] = 0;
        if (k == a.size()) break;
    }
    return count;
}

}  // namespace

TEST_CASE("term enumeration counts and order") {
    for (int dim = 1; dim <= 5; ++dim) {
        for (int ell = 1; ell <= 4; ++ell) {
            const auto terms = enumerate_terms(dim, ell);
            CHECK(static_cast<int>(terms.size()) == brute_count(dim, ell));
            std::set<std::vector<int>> seen;
            for (size_t j = 0; j < terms.size(); ++j) {
                CHECK(seen.insert(terms[j].alpha).second);
                if (j == 0) continue;
                const auto& p = terms[j - 1];
                const auto& c = terms[j];
                CHECK((p.degree < c.degree || (p.degree == c.degree && p.alpha > c.alpha)));
            }
        }
    }
    CHECK(enumerate_terms(FeatureMap::extended(3), 2).size() == 55);
    CHECK_THROWS_AS(enumerate_terms(3, 0), Error);
    CHECK(enumerate_terms(FeatureMap::standard(3), 2).size() == 21);
}

TEST_CASE("term labels") {
    const FeatureMap m = FeatureMap::standard(3);
    const auto terms = enumerate_terms(m, 2);
    std::set<std::string> labels;
    for (const auto& t : terms) labels.insert(t.label);
    CHECK(labels.count("u"));
    CHECK(labels.count("Δ_S u"));
    CHECK(labels.count("u²"));
    CHECK(labels.count("[∇_S u]_3"));
    CHECK(terms.front().label == "1");
    const FeatureMap e = FeatureMap::extended(3);
    CHECK(term_label(e, {0, 0, 0, 0, 0, 0, 0, 0, 1}) == "Δ²_S u");
    CHECK(term_label(e, {0, 0, 0, 0, 0, 1, 0, 0, 0}) == "[∇_S(Δ_S u)]_1");
    CHECK(term_label(m, {1, 0, 0, 0, 1}) == "u·Δ_S u");
    const FeatureMap k = FeatureMap::eikonal({2, 1000});
    CHECK(linear_terms(k)[2].label == "Δ^1000_S u");
    CHECK(linear_terms(k)[1].label == "Δ_S u");
}

TEST_CASE("duplicate channels are rejected") {
    FeatureMap m = FeatureMap::standard(2);
    m.channels.push_back({ChannelKind::u});
    CHECK_THROWS_AS(m.validate(), Error);
    CHECK_THROWS_AS(FeatureMap::eikonal({5, 5}).validate(), Error);
}

TEST_CASE("library columns are monomials of the channels") {
    Matrix ch(4, 3);
    ch << 1, 2, 3, -1, 0.5, 2, 0, 1, 1, 2, 2, -2;
    FeatureMap m;
    m.channels = {{ChannelKind::u}, {ChannelKind::grad, 0}, {ChannelKind::laplacian}};
    const FeatureLibrary lib = assemble_library(ch, m, enumerate_terms(m, 3));
    for (int j = 0; j < lib.n(); ++j) {
        for (Eigen::Index i = 0; i < 4; ++i) {
            double v = 1.0;
            for (int c = 0; c < 3; ++c) v *= std::pow(ch(i, c), lib.terms[static_cast<size_t>(j)].alpha[static_cast<size_t>(c)]);
            CHECK(lib.matrix(i, j) == doctest::Approx(v));
        }
    }
}

TEST_CASE("SBDF2 rows on manufactured data") {
    const Surface s = unit_sphere();
    const PointCloud cloud = analytic_normals(s, sphere_nodes(200));
    const DiscreteOperators ops(cloud, KernelSpec::matern(3, 4));
    const Snapshots snaps = manufactured_snapshots(s, cloud, exp_decay_field(field_by_name("z", 3)), 0.5, 0.0, 0.01, 4);
    CHECK(snaps.steps() == 4);
    CHECK_NOTHROW(snaps.validate(200));
    const FeatureMap m = FeatureMap::standard(3);
    const Sbdf2Rows rows = sbdf2_channels(ops, snaps, m, 2);
    const Vector z = cloud.nodes().col(2);
    // lhs approximates du/dt = -e^{-t} z at t_3 to O(dt^2)
    CHECK((rows.lhs + std::exp(-0.03) * z).lpNorm<Eigen::Infinity>() < 1e-4);
    // Laplacian channel is implicit: taken at t_3
    CHECK((rows.channels.col(4) + 2.0 * std::exp(-0.03) * z).lpNorm<Eigen::Infinity>() < 1e-3);
    // u channel is extrapolated: 2 u^2 - u^1
    const Vector extrap = 2.0 * snaps.values.row(2).transpose() - snaps.values.row(1).transpose();
    CHECK((rows.channels.col(0) - extrap).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK_THROWS_AS(sbdf2_channels(ops, snaps, m, 0), Error);
    CHECK_THROWS_AS(sbdf2_channels(ops, snaps, m, 4), Error);
}

TEST_CASE("snapshots reject non-uniform spacing") {
    Snapshots s;
    s.times = Eigen::Vector3d(0.0, 0.1, 0.25);
    s.values = Matrix::Zero(3, 2);
    s.forcing = Matrix::Zero(3, 2);
    s.dt = 0.1;
    CHECK_THROWS_AS(s.validate(2), Error);
}
