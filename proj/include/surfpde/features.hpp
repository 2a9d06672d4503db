#pragma once

#include <array>
#include <string>
#include <vector>

#include "surfpde/operators.hpp"

namespace surfpde {

enum class ChannelKind { u, grad, laplacian, grad_laplacian, bilaplacian, p_laplacian };

/// One component of the feature map z = lambda(x).
struct Channel {
    ChannelKind kind = ChannelKind::u;
    int component = 0;  // 0-based gradient component
    double p = 2.0;     // p-Laplacian exponent

    std::string label() const;
    /// True for channels that need fourth-order composites.
    bool fourth_order() const { return kind == ChannelKind::grad_laplacian || kind == ChannelKind::bilaplacian; }
    friend bool operator==(const Channel&, const Channel&) = default;
};

struct FeatureMap {
    std::vector<Channel> channels;

    int dim() const { return static_cast<int>(channels.size()); }
    /// (u, grad_1..grad_d, laplacian): dim d + 2.
    static FeatureMap standard(int d);
    /// (u, grad_1..grad_d, laplacian, grad_lap_1..grad_lap_d, bilaplacian): dim 2d + 3.
    static FeatureMap extended(int d);
    /// (u, p-Laplacian for each p); p = 2 stands for the plain Laplacian.
    static FeatureMap eikonal(const std::vector<double>& p_values);
    /// Throws invalid-argument on duplicate channels.
    void validate() const;
};

struct FeatureTerm {
    std::vector<int> alpha;
    int degree = 0;
    std::string label;
};

/// All multi-indices with |alpha| <= ell in graded lexicographic order
/// (degree ascending, then alpha descending lexicographically). Labels are
/// generic z1, z2, ...
std::vector<FeatureTerm> enumerate_terms(int dim, int ell);
/// Same order, labelled with the channel names of `map`.
std::vector<FeatureTerm> enumerate_terms(const FeatureMap& map, int ell);
/// Degree-1 terms only, one per channel (no constant term).
std::vector<FeatureTerm> linear_terms(const FeatureMap& map);

std::string term_label(const FeatureMap& map, const std::vector<int>& alpha);

struct FeatureLibrary {
    FeatureMap map;
    std::vector<FeatureTerm> terms;
    Matrix matrix;

    int n() const { return static_cast<int>(terms.size()); }
    std::vector<std::string> labels() const;
};

/// N x dim matrix with one column per channel of `map`, computed from the
/// interpolated nodal values.
Matrix evaluate_channels(const DiscreteOperators& ops, const Interpolant& interp, const FeatureMap& map);
/// Channels for raw nodal values (interpolation is implicit in the operators).
Matrix evaluate_channels(const DiscreteOperators& ops, const Vector& nodal_values, const FeatureMap& map);

/// Lambda[i, j] = prod_c channels[i, c]^{alpha_j, c}.
FeatureLibrary assemble_library(const Matrix& channels, const FeatureMap& map, std::vector<FeatureTerm> terms);

/// Time samples u*(X, t_j) and forcing f(X, t_j) on a fixed cloud, t_j = j dt.
struct Snapshots {
    Vector times;    // M+1
    Matrix values;   // (M+1) x N
    Matrix forcing;  // (M+1) x N
    double dt = 0.0;

    int steps() const { return static_cast<int>(times.size()) - 1; }
    /// Checks shapes, finiteness and uniform spacing to 1e-12.
    void validate(Eigen::Index n_nodes) const;
};

struct Sbdf2Rows {
    Matrix channels;  // N x dim
    Vector lhs;       // (3u^{j+1} - 4u^j + u^{j-1}) / (2 dt)
    Vector forcing;   // 2 f^j - f^{j-1}
};

/// SBDF2 rows at level j (1 <= j <= M-1): the Laplacian channel is taken at
/// t_{j+1}, every other channel is extrapolated as 2 c^j - c^{j-1}.
Sbdf2Rows sbdf2_channels(const DiscreteOperators& ops, const Snapshots& snaps, const FeatureMap& map, int j);

/// SBDF2 combination of channel matrices and nodal values at levels
/// (j-1, j, j+1); forcing values at (j-1, j).
Sbdf2Rows sbdf2_combine(const FeatureMap& map, const std::array<Matrix, 3>& channels,
                        const std::array<Vector, 3>& nodal, const Vector& f_prev, const Vector& f_cur, double dt);

/// Degree-1 library [u, Delta^{p_1} u, ..., Delta^{p_m} u].
FeatureLibrary eikonal_library(const DiscreteOperators& ops, const Interpolant& interp,
                               const std::vector<double>& p_values);

}  // namespace surfpde
