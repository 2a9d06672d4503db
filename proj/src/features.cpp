#include "surfpde/features.hpp"

#include <cmath>
#include <sstream>

#include "surfpde/errors.hpp"

namespace surfpde {
namespace {

void append_degree(int dim, int remaining, int pos, std::vector<int>& alpha, std::vector<std::vector<int>>& out) {
    if (pos == dim - 1) {
        alpha[static_cast<size_t>(pos)] = remaining;
        out.push_back(alpha);
        return;
    }
    for (int a = remaining; a >= 0; --a) {
        alpha[static_cast<size_t>(pos)] = a;
        append_degree(dim, remaining - a, pos + 1, alpha, out);
    }
    alpha[static_cast<size_t>(pos)] = 0;
}

std::vector<std::vector<int>> graded_lex(int dim, int ell) {
    require(dim >= 1, "feature map dimension must be positive");
    require(ell >= 1, "library degree must be positive");
    std::vector<std::vector<int>> out;
    std::vector<int> alpha(static_cast<size_t>(dim), 0);
    for (int deg = 0; deg <= ell; ++deg) append_degree(dim, deg, 0, alpha, out);
    return out;
}

std::string format_p(double p) {
    std::ostringstream s;
    s << p;
    return s.str();
}

std::string power_label(const std::string& base, int k) {
    if (k == 1) return base;
    static const char* const superscripts[] = {"⁰", "¹", "²", "³", "⁴", "⁵", "⁶", "⁷", "⁸", "⁹"};
    std::string exponent;
    for (char digit : std::to_string(k)) exponent += superscripts[digit - '0'];
    const bool wrap = base.find(' ') != std::string::npos;
    return (wrap ? "(" + base + ")" : base) + exponent;
}

Matrix compute_channels(const DiscreteOperators& ops, const Vector& u, const FeatureMap& map) {
    map.validate();
    const Eigen::Index n = ops.size();
    require(u.size() == n, "channel evaluation: sample count does not match the cloud");
    for (const auto& c : map.channels) {
        if (c.fourth_order()) require_fourth_order(ops.kernel());
        if (c.kind == ChannelKind::grad || c.kind == ChannelKind::grad_laplacian) {
            require(c.component >= 0 && c.component < ops.dim(), "gradient channel component out of range");
        }
    }
    Matrix out(n, map.dim());
    Vector lap;
    auto laplacian = [&]() -> const Vector& {
        if (lap.size() == 0) lap = ops.laplacian() * u;
        return lap;
    };
    for (int c = 0; c < map.dim(); ++c) {
        const Channel& ch = map.channels[static_cast<size_t>(c)];
        const auto k = static_cast<size_t>(ch.component);
        switch (ch.kind) {
            case ChannelKind::u: out.col(c) = u; break;
            case ChannelKind::grad: out.col(c).noalias() = ops.grad_nodal_mats()[k] * u; break;
            case ChannelKind::laplacian: out.col(c) = laplacian(); break;
            case ChannelKind::grad_laplacian: out.col(c).noalias() = ops.grad_nodal_mats()[k] * laplacian(); break;
            case ChannelKind::bilaplacian: out.col(c).noalias() = ops.laplacian() * laplacian(); break;
            case ChannelKind::p_laplacian: out.col(c) = p_laplacian_nodal(ops, u, ch.p); break;
        }
    }
    return out;
}

int channel_index(const FeatureMap& map, ChannelKind kind) {
    for (int c = 0; c < map.dim(); ++c) {
        if (map.channels[static_cast<size_t>(c)].kind == kind) return c;
    }
    return -1;
}

}  // namespace

std::string Channel::label() const {
    const std::string k = std::to_string(component + 1);
    switch (kind) {
        case ChannelKind::u: return "u";
        case ChannelKind::grad: return "[∇_S u]_" + k;
        case ChannelKind::laplacian: return "Δ_S u";
        case ChannelKind::grad_laplacian: return "[∇_S(Δ_S u)]_" + k;
        case ChannelKind::bilaplacian: return "Δ²_S u";
        case ChannelKind::p_laplacian: return "Δ^" + format_p(p) + "_S u";
    }
    return "?";
}

FeatureMap FeatureMap::standard(int d) {
    require(d >= 2, "feature map needs ambient dimension >= 2");
    FeatureMap m;
    m.channels.push_back({ChannelKind::u});
    for (int k = 0; k < d; ++k) m.channels.push_back({ChannelKind::grad, k});
    m.channels.push_back({ChannelKind::laplacian});
    return m;
}

FeatureMap FeatureMap::extended(int d) {
    FeatureMap m = standard(d);
    for (int k = 0; k < d; ++k) m.channels.push_back({ChannelKind::grad_laplacian, k});
    m.channels.push_back({ChannelKind::bilaplacian});
    return m;
}

FeatureMap FeatureMap::eikonal(const std::vector<double>& p_values) {
    require(!p_values.empty(), "eikonal library needs at least one p value");
    FeatureMap m;
    m.channels.push_back({ChannelKind::u});
    for (double p : p_values) {
        require(p >= 2.0, "p-Laplacian exponents must be >= 2");
        if (p == 2.0) {
            m.channels.push_back({ChannelKind::laplacian});
        } else {
            m.channels.push_back({ChannelKind::p_laplacian, 0, p});
        }
    }
    m.validate();
    return m;
}

void FeatureMap::validate() const {
    require(!channels.empty(), "feature map is empty");
    for (size_t i = 0; i < channels.size(); ++i) {
        for (size_t j = i + 1; j < channels.size(); ++j) {
            require(!(channels[i] == channels[j]), "duplicate feature channel " + channels[i].label());
        }
    }
}

std::string term_label(const FeatureMap& map, const std::vector<int>& alpha) {
    require(static_cast<int>(alpha.size()) == map.dim(), "multi-index length does not match the feature map");
    std::string label;
    for (int c = 0; c < map.dim(); ++c) {
        const int a = alpha[static_cast<size_t>(c)];
        if (a == 0) continue;
        if (!label.empty()) label += "·";
        label += power_label(map.channels[static_cast<size_t>(c)].label(), a);
    }
    return label.empty() ? "1" : label;
}

std::vector<FeatureTerm> enumerate_terms(int dim, int ell) {
    std::vector<FeatureTerm> terms;
    for (auto& alpha : graded_lex(dim, ell)) {
        FeatureTerm t;
        t.degree = 0;
        std::string label;
        for (int c = 0; c < dim; ++c) {
            const int a = alpha[static_cast<size_t>(c)];
            t.degree += a;
            if (a == 0) continue;
            if (!label.empty()) label += "·";
            label += power_label("z" + std::to_string(c + 1), a);
        }
        t.label = label.empty() ? "1" : label;
        t.alpha = std::move(alpha);
        terms.push_back(std::move(t));
    }
    return terms;
}

std::vector<FeatureTerm> enumerate_terms(const FeatureMap& map, int ell) {
    map.validate();
    auto terms = enumerate_terms(map.dim(), ell);
    for (auto& t : terms) t.label = term_label(map, t.alpha);
    return terms;
}

std::vector<FeatureTerm> linear_terms(const FeatureMap& map) {
    map.validate();
    std::vector<FeatureTerm> terms;
    for (int c = 0; c < map.dim(); ++c) {
        FeatureTerm t;
        t.alpha.assign(static_cast<size_t>(map.dim()), 0);
        t.alpha[static_cast<size_t>(c)] = 1;
        t.degree = 1;
        t.label = map.channels[static_cast<size_t>(c)].label();
        terms.push_back(std::move(t));
    }
    return terms;
}

std::vector<std::string> FeatureLibrary::labels() const {
    std::vector<std::string> out;
    out.reserve(terms.size());
    for (const auto& t : terms) out.push_back(t.label);
    return out;
}

Matrix evaluate_channels(const DiscreteOperators& ops, const Interpolant& interp, const FeatureMap& map) {
    require(interp.ops == &ops, "interpolant was built on different operators");
    return compute_channels(ops, interp.nodal_values(), map);
}

Matrix evaluate_channels(const DiscreteOperators& ops, const Vector& nodal_values, const FeatureMap& map) {
    return compute_channels(ops, nodal_values, map);
}

FeatureLibrary assemble_library(const Matrix& channels, const FeatureMap& map, std::vector<FeatureTerm> terms) {
    require(channels.cols() == map.dim(), "channel matrix width does not match the feature map");
    for (Eigen::Index c = 0; c < channels.cols(); ++c) {
        for (Eigen::Index i = 0; i < channels.rows(); ++i) {
            if (!std::isfinite(channels(i, c))) {
                std::ostringstream msg;
                msg << "non-finite feature at row " << i << ", channel " << map.channels[static_cast<size_t>(c)].label();
                fail(ErrorKind::non_finite, msg.str());
            }
        }
    }
    FeatureLibrary lib;
    lib.map = map;
    lib.matrix.resize(channels.rows(), static_cast<Eigen::Index>(terms.size()));
    for (size_t j = 0; j < terms.size(); ++j) {
        const auto& alpha = terms[j].alpha;
        require(static_cast<int>(alpha.size()) == map.dim(), "term multi-index length does not match the feature map");
        auto col = lib.matrix.col(static_cast<Eigen::Index>(j));
        col.setOnes();
        for (int c = 0; c < map.dim(); ++c) {
            for (int a = 0; a < alpha[static_cast<size_t>(c)]; ++a) col.array() *= channels.col(c).array();
        }
    }
    lib.terms = std::move(terms);
    return lib;
}

void Snapshots::validate(Eigen::Index n_nodes) const {
    require(times.size() >= 1, "snapshots need at least one time level");
    require(values.rows() == times.size() && forcing.rows() == times.size(), "snapshot rows must match time levels");
    require(values.cols() == n_nodes && forcing.cols() == n_nodes, "snapshot width must match the node count");
    require(dt > 0.0, "snapshot time step must be positive");
    require(values.allFinite() && forcing.allFinite(), "snapshots must be finite");
    for (Eigen::Index j = 0; j + 1 < times.size(); ++j) {
        require(std::abs(times[j + 1] - times[j] - dt) <= 1e-12, "snapshot times are not uniformly spaced");
    }
}

Sbdf2Rows sbdf2_channels(const DiscreteOperators& ops, const Snapshots& snaps, const FeatureMap& map, int j) {
    snaps.validate(ops.size());
    if (j < 1 || j > snaps.steps() - 1) {
        fail(ErrorKind::invalid_argument, "SBDF2 level j must satisfy 1 <= j <= M-1, got " + std::to_string(j));
    }
    auto nodal = [&](int level) {
        return interpolate(ops, snaps.values.row(level).transpose()).nodal_values();
    };
    const Vector u_prev = nodal(j - 1), u_cur = nodal(j), u_next = nodal(j + 1);
    const Matrix c_prev = compute_channels(ops, u_prev, map);
    const Matrix c_cur = compute_channels(ops, u_cur, map);
    const Matrix c_next = compute_channels(ops, u_next, map);

    return sbdf2_combine(map, {c_prev, c_cur, c_next}, {u_prev, u_cur, u_next}, snaps.forcing.row(j - 1).transpose(),
                         snaps.forcing.row(j).transpose(), snaps.dt);
}

Sbdf2Rows sbdf2_combine(const FeatureMap& map, const std::array<Matrix, 3>& channels,
                        const std::array<Vector, 3>& nodal, const Vector& f_prev, const Vector& f_cur, double dt) {
    Sbdf2Rows rows;
    rows.channels = 2.0 * channels[1] - channels[0];
    const int lap = channel_index(map, ChannelKind::laplacian);
    if (lap >= 0) rows.channels.col(lap) = channels[2].col(lap);
    rows.lhs = (3.0 * nodal[2] - 4.0 * nodal[1] + nodal[0]) / (2.0 * dt);
    rows.forcing = 2.0 * f_cur - f_prev;
    return rows;
}

FeatureLibrary eikonal_library(const DiscreteOperators& ops, const Interpolant& interp,
                               const std::vector<double>& p_values) {
    const FeatureMap map = FeatureMap::eikonal(p_values);
    return assemble_library(evaluate_channels(ops, interp, map), map, linear_terms(map));
}

}  // namespace surfpde
