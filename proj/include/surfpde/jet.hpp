#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace surfpde {

/// Second-order forward-mode jet: value, gradient and Hessian with respect to
/// D independent variables. Used to differentiate closed-form surface and
/// test-field expressions exactly.
template <int D>
struct Jet2 {
    using Grad = Eigen::Matrix<double, D, 1>;
    using Hess = Eigen::Matrix<double, D, D>;

    double v = 0.0;
    Grad g = Grad::Zero();
    Hess h = Hess::Zero();

    Jet2() = default;
    Jet2(double value) : v(value) {}  // NOLINT: constants promote implicitly
    Jet2(double value, const Grad& grad, const Hess& hess) : v(value), g(grad), h(hess) {}

    static Jet2 variable(double value, int index) {
        Jet2 j(value);
        j.g[index] = 1.0;
        return j;
    }
};

// Chain rule for a scalar function with derivatives f0, f1, f2 at a.v.
template <int D>
Jet2<D> chain(const Jet2<D>& a, double f0, double f1, double f2) {
    return {f0, f1 * a.g, f1 * a.h + f2 * a.g * a.g.transpose()};
}

template <int D>
Jet2<D> operator+(const Jet2<D>& a, const Jet2<D>& b) {
    return {a.v + b.v, a.g + b.g, a.h + b.h};
}
template <int D>
Jet2<D> operator-(const Jet2<D>& a, const Jet2<D>& b) {
    return {a.v - b.v, a.g - b.g, a.h - b.h};
}
template <int D>
Jet2<D> operator-(const Jet2<D>& a) {
    return {-a.v, -a.g, -a.h};
}
template <int D>
Jet2<D> operator*(const Jet2<D>& a, const Jet2<D>& b) {
    return {a.v * b.v, a.v * b.g + b.v * a.g,
            a.v * b.h + b.v * a.h + a.g * b.g.transpose() + b.g * a.g.transpose()};
}
template <int D>
Jet2<D> operator/(const Jet2<D>& a, const Jet2<D>& b) {
    const double inv = 1.0 / b.v;
    return a * chain(b, inv, -inv * inv, 2.0 * inv * inv * inv);
}

template <int D> Jet2<D> operator+(const Jet2<D>& a, double b) { return a + Jet2<D>(b); }
template <int D> Jet2<D> operator+(double a, const Jet2<D>& b) { return Jet2<D>(a) + b; }
template <int D> Jet2<D> operator-(const Jet2<D>& a, double b) { return a - Jet2<D>(b); }
template <int D> Jet2<D> operator-(double a, const Jet2<D>& b) { return Jet2<D>(a) - b; }
template <int D> Jet2<D> operator*(const Jet2<D>& a, double b) { return {a.v * b, a.g * b, a.h * b}; }
template <int D> Jet2<D> operator*(double a, const Jet2<D>& b) { return b * a; }
template <int D> Jet2<D> operator/(const Jet2<D>& a, double b) { return a * (1.0 / b); }
template <int D> Jet2<D> operator/(double a, const Jet2<D>& b) { return Jet2<D>(a) / b; }

template <int D>
Jet2<D> exp(const Jet2<D>& a) {
    const double e = std::exp(a.v);
    return chain(a, e, e, e);
}
template <int D>
Jet2<D> sin(const Jet2<D>& a) {
    const double s = std::sin(a.v), c = std::cos(a.v);
    return chain(a, s, c, -s);
}
template <int D>
Jet2<D> cos(const Jet2<D>& a) {
    const double s = std::sin(a.v), c = std::cos(a.v);
    return chain(a, c, -s, -c);
}
template <int D>
Jet2<D> sqrt(const Jet2<D>& a) {
    const double r = std::sqrt(a.v);
    return chain(a, r, 0.5 / r, -0.25 / (r * a.v));
}
template <int D>
Jet2<D> pow(const Jet2<D>& a, int n) {
    if (n == 0) return Jet2<D>(1.0);
    if (n == 1) return a;
    const double p2 = n >= 2 ? std::pow(a.v, n - 2) : std::pow(a.v, n - 2.0);
    const double p1 = p2 * a.v;
    return chain(a, p1 * a.v, n * p1, n * (n - 1) * p2);
}

// Plain-double overloads so generic expressions compile for both types.
inline double pow(double a, int n) { return std::pow(a, n); }
using std::cos;
using std::exp;
using std::sin;
using std::sqrt;

}  // namespace surfpde
