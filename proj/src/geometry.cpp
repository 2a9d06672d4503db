#include "surfpde/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <random>
#include <sstream>

#include "surfpde/errors.hpp"

namespace surfpde {
namespace {

Vector vec(std::initializer_list<double> values) {
    Vector v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double x : values) v[i++] = x;
    return v;
}

// Flips all normals when they point towards the centroid on average. A single
// global sign keeps tori and other non-star-shaped surfaces consistent.
void orient_outward(const Matrix& nodes, Matrix& normals) {
    const Eigen::RowVectorXd centroid = nodes.colwise().mean();
    double score = 0.0;
    for (Eigen::Index i = 0; i < nodes.rows(); ++i) {
        score += normals.row(i).dot(nodes.row(i) - centroid);
    }
    if (score < 0.0) normals = -normals;
}

std::vector<std::vector<Eigen::Index>> nearest_neighbors(const Matrix& nodes, int k) {
    const Eigen::Index n = nodes.rows();
    std::vector<std::vector<Eigen::Index>> result(static_cast<size_t>(n));
    std::vector<std::pair<double, Eigen::Index>> dist(static_cast<size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            dist[static_cast<size_t>(j)] = {(nodes.row(i) - nodes.row(j)).squaredNorm(), j};
        }
        dist[static_cast<size_t>(i)].first = std::numeric_limits<double>::infinity();
        std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
        auto& nb = result[static_cast<size_t>(i)];
        nb.reserve(static_cast<size_t>(k));
        for (int j = 0; j < k; ++j) nb.push_back(dist[static_cast<size_t>(j)].second);
    }
    return result;
}

}  // namespace

// --- Surface -----------------------------------------------------------------

double Surface::value(const Vector& x) const {
    require(has_implicit(), "surface '" + name + "' has no implicit function");
    return implicit_fn(x);
}

Vector Surface::gradient(const Vector& x) const {
    if (implicit_gradient) return implicit_gradient(x);
    require(has_implicit(), "surface '" + name + "' has no implicit function");
    constexpr double h = 1e-6;
    Vector g(x.size());
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        Vector xp = x, xm = x;
        xp[k] += h;
        xm[k] -= h;
        g[k] = (implicit_fn(xp) - implicit_fn(xm)) / (2.0 * h);
    }
    return g;
}

Matrix Surface::hessian(const Vector& x) const {
    if (implicit_hessian) return implicit_hessian(x);
    constexpr double h = 1e-5;
    Matrix hm(x.size(), x.size());
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        Vector xp = x, xm = x;
        xp[k] += h;
        xm[k] -= h;
        hm.col(k) = (gradient(xp) - gradient(xm)) / (2.0 * h);
    }
    return 0.5 * (hm + hm.transpose());
}

double Surface::mean_curvature_sum(const Vector& x) const {
    const Vector g = gradient(x);
    const double norm = g.norm();
    const Vector n = g / norm;
    const Matrix h = hessian(x);
    return (h.trace() - n.dot(h * n)) / norm;
}

Surface unit_circle() {
    return make_implicit_surface<2>(
        "circle", [](auto x, auto y) { return x * x + y * y - 1.0; }, vec({-1.5, -1.5}), vec({1.5, 1.5}));
}

Surface unit_sphere() {
    return make_implicit_surface<3>(
        "sphere", [](auto x, auto y, auto z) { return x * x + y * y + z * z - 1.0; },
        vec({-1.5, -1.5, -1.5}), vec({1.5, 1.5, 1.5}));
}

Surface torus() {
    return make_implicit_surface<3>(
        "torus",
        [](auto x, auto y, auto z) {
            auto s = x * x + y * y + z * z + (1.0 - 1.0 / 9.0);
            return s * s - 4.0 * (x * x + y * y);
        },
        vec({-1.5, -1.5, -0.5}), vec({1.5, 1.5, 0.5}));
}

Surface cyclide() {
    return make_implicit_surface<3>(
        "cyclide",
        [](auto x, auto y, auto z) {
            const double c = std::sqrt(4.0 - 1.9 * 1.9);
            auto s = x * x + y * y + z * z - 1.0 + 1.9 * 1.9;
            auto a = 2.0 * x + c;
            auto b = 1.9 * y;
            return s * s - 4.0 * a * a - 4.0 * b * b;
        },
        vec({-3.5, -3.0, -1.5}), vec({3.5, 3.0, 1.5}));
}

Surface bretzel2() {
    return make_implicit_surface<3>(
        "bretzel2",
        [](auto x, auto y, auto z) {
            auto q = x * x * (1.0 - x * x) - y * y;
            return q * q + 0.5 * z * z - (x * x + y * y + z * z) / 40.0 - 1.0 / 40.0;
        },
        vec({-1.5, -1.0, -0.8}), vec({1.5, 1.0, 0.8}));
}

Surface surface_by_name(const std::string& name) {
    if (name == "circle") return unit_circle();
    if (name == "sphere") return unit_sphere();
    if (name == "torus") return torus();
    if (name == "cyclide") return cyclide();
    if (name == "bretzel2") return bretzel2();
    fail(ErrorKind::invalid_argument, "unknown surface '" + name + "'");
}

// --- PointCloud ----------------------------------------------------------------

double min_pairwise_distance(const Matrix& nodes) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < nodes.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < nodes.rows(); ++j) {
            best = std::min(best, (nodes.row(i) - nodes.row(j)).squaredNorm());
        }
    }
    return std::sqrt(best);
}

double fill_distance(const Matrix& nodes, const Matrix& probes) {
    double worst = 0.0;
    for (Eigen::Index p = 0; p < probes.rows(); ++p) {
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < nodes.rows(); ++i) {
            best = std::min(best, (nodes.row(i) - probes.row(p)).squaredNorm());
        }
        worst = std::max(worst, best);
    }
    return std::sqrt(worst);
}

PointCloud::PointCloud(Matrix nodes, std::uint64_t seed) : nodes_(std::move(nodes)), seed_(seed) {
    require(nodes_.rows() >= 1 && nodes_.cols() >= 2, "point cloud needs at least one node in R^d, d >= 2");
    require(nodes_.allFinite(), "point cloud contains non-finite coordinates");
    min_spacing_ = nodes_.rows() > 1 ? min_pairwise_distance(nodes_) : 0.0;
    require(nodes_.rows() == 1 || min_spacing_ > 0.0, "point cloud nodes must be pairwise distinct");
}

PointCloud PointCloud::with_normals(const Matrix& normals) const {
    require(normals.rows() == nodes_.rows() && normals.cols() == nodes_.cols(),
            "normals must have the same shape as the nodes");
    PointCloud out = *this;
    Matrix unit = normals;
    const int d = dim();
    out.projections_.assign(static_cast<size_t>(size()), Matrix());
    for (Eigen::Index i = 0; i < size(); ++i) {
        const double norm = unit.row(i).norm();
        require(std::isfinite(norm) && norm > 0.0, "normal " + std::to_string(i) + " is zero or non-finite");
        unit.row(i) /= norm;
        const Vector n = unit.row(i).transpose();
        out.projections_[static_cast<size_t>(i)] = Matrix::Identity(d, d) - n * n.transpose();
    }
    out.normals_ = std::move(unit);
    return out;
}

const Matrix& PointCloud::normals() const {
    require(normals_.has_value(), "point cloud has no normals");
    return *normals_;
}

const Matrix& PointCloud::projection(Eigen::Index i) const {
    require(normals_.has_value(), "point cloud has no normals");
    return projections_[static_cast<size_t>(i)];
}

// --- node generators -------------------------------------------------------------

PointCloud circle_nodes(int n) {
    require(n >= 3, "circle_nodes requires N >= 3");
    Matrix x(n, 2);
    for (int i = 0; i < n; ++i) {
        const double t = 2.0 * std::numbers::pi * i / n;
        x(i, 0) = std::cos(t);
        x(i, 1) = std::sin(t);
    }
    return PointCloud(x).with_normals(x);
}

PointCloud sphere_nodes(int n) {
    require(n >= 4, "sphere_nodes requires N >= 4");
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    Matrix x(n, 3);
    for (int i = 0; i < n; ++i) {
        const double z = 1.0 - (2.0 * i + 1.0) / n;
        const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden * i;
        x(i, 0) = rho * std::cos(phi);
        x(i, 1) = rho * std::sin(phi);
        x(i, 2) = z;
        x.row(i).normalize();
    }
    return PointCloud(x).with_normals(x);
}

PointCloud implicit_surface_nodes(const Surface& surface, int n, std::uint64_t seed) {
    require(surface.has_implicit(), "implicit_surface_nodes needs an implicit function");
    require(n >= 10, "implicit_surface_nodes requires N >= 10");
    const int d = surface.ambient_dim;
    require(surface.box_lo.size() == d && surface.box_hi.size() == d, "surface sampling box has wrong dimension");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const long target = 10L * n;
    const long max_attempts = 200L * n;

    std::vector<Vector> candidates;
    candidates.reserve(static_cast<size_t>(target));
    for (long attempt = 0; attempt < max_attempts && long(candidates.size()) < target; ++attempt) {
        Vector x(d);
        for (int k = 0; k < d; ++k) x[k] = surface.box_lo[k] + unit(rng) * (surface.box_hi[k] - surface.box_lo[k]);
        bool converged = false;
        for (int it = 0; it < 100; ++it) {
            const double f = surface.value(x);
            if (std::abs(f) <= 1e-13) {
                converged = true;
                break;
            }
            const Vector g = surface.gradient(x);
            const double g2 = g.squaredNorm();
            if (!(g2 > 1e-24) || !std::isfinite(g2)) break;
            x -= (f / g2) * g;
            if (!x.allFinite()) break;
        }
        if (!converged) {
            // Accept a candidate that stalled just above the Newton target.
            converged = x.allFinite() && std::abs(surface.value(x)) <= 1e-11;
        }
        if (converged) candidates.push_back(std::move(x));
    }
    if (long(candidates.size()) < n) {
        std::ostringstream msg;
        msg << "only " << candidates.size() << " of " << n << " candidates projected onto " << surface.name;
        fail(ErrorKind::generation_failure, msg.str());
    }

    // Farthest-point thinning, starting from the first candidate.
    const size_t m = candidates.size();
    std::vector<double> dist(m, std::numeric_limits<double>::infinity());
    std::vector<size_t> chosen;
    chosen.reserve(static_cast<size_t>(n));
    size_t next = 0;
    for (int c = 0; c < n; ++c) {
        chosen.push_back(next);
        const Vector& p = candidates[next];
        size_t best = 0;
        double best_d = -1.0;
        for (size_t j = 0; j < m; ++j) {
            dist[j] = std::min(dist[j], (candidates[j] - p).squaredNorm());
            if (dist[j] > best_d) {
                best_d = dist[j];
                best = j;
            }
        }
        next = best;
    }
    Matrix nodes(n, d);
    for (int i = 0; i < n; ++i) nodes.row(i) = candidates[chosen[static_cast<size_t>(i)]].transpose();
    return PointCloud(nodes, seed);
}

PointCloud analytic_normals(const Surface& surface, const PointCloud& cloud) {
    require(surface.ambient_dim == cloud.dim(), "surface and cloud dimensions differ");
    Matrix normals(cloud.size(), cloud.dim());
    for (Eigen::Index i = 0; i < cloud.size(); ++i) {
        const Vector g = surface.gradient(cloud.node(i));
        const double norm = g.norm();
        if (!(norm >= 1e-12)) {
            fail(ErrorKind::singular_gradient, "implicit gradient vanishes at node " + std::to_string(i));
        }
        normals.row(i) = (g / norm).transpose();
    }
    orient_outward(cloud.nodes(), normals);
    return cloud.with_normals(normals);
}

PointCloud rough_normals(const PointCloud& cloud, int k) {
    const int d = cloud.dim();
    require(k >= d && cloud.size() > k, "rough_normals requires N > k >= d");
    const Matrix& x = cloud.nodes();
    const auto neighbors = nearest_neighbors(x, k);
    const Eigen::Index n = cloud.size();

    Matrix normals(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& nb = neighbors[static_cast<size_t>(i)];
        Matrix local(static_cast<Eigen::Index>(nb.size()) + 1, d);
        local.row(0) = x.row(i);
        for (size_t j = 0; j < nb.size(); ++j) local.row(static_cast<Eigen::Index>(j) + 1) = x.row(nb[j]);
        const Eigen::RowVectorXd mean = local.colwise().mean();
        const Matrix centered = local.rowwise() - mean;
        const Matrix cov = centered.transpose() * centered;
        Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
        const Vector& lambda = eig.eigenvalues();  // ascending
        if (!(lambda[1] > 1e-12 * lambda[d - 1])) {
            fail(ErrorKind::ill_conditioned_neighborhood,
                 "neighbourhood of node " + std::to_string(i) + " is degenerate");
        }
        normals.row(i) = eig.eigenvectors().col(0).transpose();
    }

    // Sign propagation over the symmetric neighbour graph (Prim order on
    // 1 - |n_i . n_j|), one tree per connected component.
    std::vector<std::vector<Eigen::Index>> graph(static_cast<size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j : neighbors[static_cast<size_t>(i)]) {
            graph[static_cast<size_t>(i)].push_back(j);
            graph[static_cast<size_t>(j)].push_back(i);
        }
    }
    std::vector<char> done(static_cast<size_t>(n), 0);
    const Eigen::RowVectorXd centroid = x.colwise().mean();
    using Edge = std::pair<double, std::pair<Eigen::Index, Eigen::Index>>;
    for (Eigen::Index root = 0; root < n; ++root) {
        if (done[static_cast<size_t>(root)]) continue;
        std::vector<Eigen::Index> component;
        std::priority_queue<Edge, std::vector<Edge>, std::greater<>> queue;
        queue.push({0.0, {root, root}});
        while (!queue.empty()) {
            const auto [w, edge] = queue.top();
            queue.pop();
            const auto [from, to] = edge;
            if (done[static_cast<size_t>(to)]) continue;
            done[static_cast<size_t>(to)] = 1;
            component.push_back(to);
            if (normals.row(to).dot(normals.row(from)) < 0.0) normals.row(to) *= -1.0;
            for (Eigen::Index nb : graph[static_cast<size_t>(to)]) {
                if (done[static_cast<size_t>(nb)]) continue;
                const double weight = 1.0 - std::abs(normals.row(to).dot(normals.row(nb)));
                queue.push({weight, {to, nb}});
            }
        }
        double score = 0.0;
        for (Eigen::Index i : component) score += normals.row(i).dot(x.row(i) - centroid);
        if (score < 0.0) {
            for (Eigen::Index i : component) normals.row(i) *= -1.0;
        }
    }
    return cloud.with_normals(normals);
}

// --- normal extension ---------------------------------------------------------

double LevelSetModel::evaluate(const Vector& x) const {
    double s = 0.0;
    for (Eigen::Index j = 0; j < centers.rows(); ++j) {
        s += coefficients[j] * radial_value(kernel, (x - centers.row(j).transpose()).norm());
    }
    return s;
}

Vector LevelSetModel::gradient(const Vector& x) const {
    Vector g = Vector::Zero(x.size());
    for (Eigen::Index j = 0; j < centers.rows(); ++j) {
        const Vector diff = x - centers.row(j).transpose();
        const double r = diff.norm();
        if (r == 0.0) continue;
        g += coefficients[j] * radial(kernel, r).derivative_over_r * diff;
    }
    return g;
}

double default_extension_offset(const PointCloud& cloud) { return 0.5 * cloud.fill_distance_estimate(); }

std::pair<LevelSetModel, PointCloud> normal_extension(const PointCloud& cloud, const PointCloud& rough,
                                                      double delta, const KernelSpec& kernel) {
    require(rough.has_normals(), "normal_extension needs rough normals");
    require(rough.size() == cloud.size() && rough.dim() == cloud.dim(), "rough normals do not match the cloud");
    require(kernel.ambient_dim == cloud.dim(), "kernel dimension does not match the cloud");
    require(kernel.gradient_smooth_at_origin(), "normal_extension needs a differentiable kernel");
    const double limit = 0.5 * cloud.fill_distance_estimate();
    require(delta > 0.0 && delta <= limit * (1.0 + 1e-12),
            "offset delta must lie in (0, half the minimum node spacing]");

    const Eigen::Index n = cloud.size();
    const Matrix& normals = rough.normals();
    LevelSetModel model;
    model.kernel = kernel;
    model.offset = delta;
    model.centers.resize(3 * n, cloud.dim());
    model.centers.topRows(n) = cloud.nodes();
    model.centers.middleRows(n, n) = cloud.nodes() - delta * normals;
    model.centers.bottomRows(n) = cloud.nodes() + delta * normals;

    Vector values(3 * n);
    values.head(n).setZero();
    values.segment(n, n).setConstant(-1.0);
    values.tail(n).setConstant(1.0);

    const Matrix gram = kernel_matrix(kernel, model.centers, model.centers);
    const GramFactorization factor(gram);
    model.coefficients = factor.solve(values);
    model.jitter = factor.jitter();
    model.rcond = factor.rcond();

    Matrix refined(n, cloud.dim());
    for (Eigen::Index i = 0; i < n; ++i) {
        Vector g = model.gradient(cloud.node(i));
        const double norm = g.norm();
        if (!(norm > 0.0) || !std::isfinite(norm)) {
            fail(ErrorKind::ill_conditioned, "level-set gradient vanishes at node " + std::to_string(i));
        }
        g /= norm;
        if (g.dot(normals.row(i).transpose()) < 0.0) g = -g;
        refined.row(i) = g.transpose();
    }
    return {std::move(model), cloud.with_normals(refined)};
}

double surface_laplacian_from_derivatives(const Surface& surface, const Vector& x, const Vector& grad,
                                          const Matrix& hess) {
    const Vector g = surface.gradient(x);
    const Vector n = g / g.norm();
    const double tangential_trace = hess.trace() - n.dot(hess * n);
    return tangential_trace - surface.mean_curvature_sum(x) * n.dot(grad);
}

}  // namespace surfpde
