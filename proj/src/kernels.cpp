#include "surfpde/kernels.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "surfpde/errors.hpp"

namespace surfpde {
namespace {

// Below this radius r^nu K_nu(r) equals its r -> 0 limit to double precision.
constexpr double kTinyRadius = 1e-30;

bool is_half_integer(double nu) {
    const double twice = 2.0 * nu;
    return std::abs(twice - std::round(twice)) < 1e-12 && std::lround(twice) % 2 != 0;
}

bool is_integer(double nu) { return std::abs(nu - std::round(nu)) < 1e-12; }

std::array<double, 2> k01(double x) { return {std::cyl_bessel_k(0.0, x), std::cyl_bessel_k(1.0, x)}; }

// K_{n+1/2}(r) = sqrt(pi/(2r)) e^{-r} sum_k (n+k)! / (k! (n-k)! (2r)^k).
double k_half_integer(int n, double r) {
    double sum = 0.0;
    double coef = 1.0;  // (n+k)! / (k! (n-k)!) / (2r)^k, built incrementally
    for (int k = 0; k <= n; ++k) {
        if (k > 0) coef *= double(n + k) * double(n - k + 1) / (double(k) * 2.0 * r);
        sum += coef;
    }
    return std::sqrt(std::numbers::pi / (2.0 * r)) * std::exp(-r) * sum;
}

// K_{nu-1}(r) and K_nu(r) for nu >= 1/2 (K_{-1/2} = K_{1/2}).
std::array<double, 2> bessel_k_pair(double nu, double r) {
    if (is_half_integer(nu)) {
        const int n = static_cast<int>(std::lround(nu - 0.5));
        const double upper = k_half_integer(n, r);
        const double lower = n == 0 ? upper : k_half_integer(n - 1, r);
        return {lower, upper};
    }
    const int n = static_cast<int>(std::lround(nu));
    auto [k0, k1] = k01(r);
    if (n == 0) return {k1, k0};  // K_{-1} = K_1
    double prev = k0, cur = k1;
    for (int j = 1; j < n; ++j) {
        const double next = prev + (2.0 * j / r) * cur;
        prev = cur;
        cur = next;
    }
    return {prev, cur};
}

// lim_{r->0} r^nu K_nu(r) = 2^{nu-1} Gamma(nu), nu > 0.
double matern_origin_limit(double nu) { return std::exp2(nu - 1.0) * std::tgamma(nu); }

}  // namespace

KernelSpec KernelSpec::matern(int ambient_dim, int smoothness_m, int codim) {
    KernelSpec spec;
    spec.family = KernelFamily::matern_sobolev;
    spec.ambient_dim = ambient_dim;
    spec.smoothness_m = smoothness_m;
    spec.codim = codim;
    spec.validate();
    return spec;
}

KernelSpec KernelSpec::gaussian(int ambient_dim, double sigma2, bool squared) {
    KernelSpec spec;
    spec.family = KernelFamily::gaussian;
    spec.ambient_dim = ambient_dim;
    spec.sigma2 = sigma2;
    spec.gaussian_squared = squared;
    spec.validate();
    return spec;
}

void KernelSpec::validate() const {
    require(ambient_dim >= 1, "kernel ambient dimension must be positive");
    if (family == KernelFamily::matern_sobolev) {
        require(codim >= 1 && codim < ambient_dim, "kernel codimension must lie in [1, d-1]");
        require(tau() > 0.5 * ambient_dim, "Matern kernel requires tau > d/2");
    } else {
        require(sigma2 > 0.0, "Gaussian kernel requires sigma2 > 0");
    }
}

bool KernelSpec::gradient_smooth_at_origin() const {
    if (family == KernelFamily::gaussian) return gaussian_squared;
    return nu() > 1.0;
}

double bessel_k(double nu, double r) {
    if (!(r > 0.0) || !std::isfinite(r)) fail(ErrorKind::invalid_argument, "bessel_k requires r > 0");
    if (nu < 0.0 || !(is_integer(nu) || is_half_integer(nu))) {
        std::ostringstream msg;
        msg << "bessel_k supports integer and half-integer orders only, got " << nu;
        fail(ErrorKind::unsupported_order, msg.str());
    }
    if (is_half_integer(nu)) return k_half_integer(static_cast<int>(std::lround(nu - 0.5)), r);
    return bessel_k_pair(nu, r)[1];
}

RadialValue radial(const KernelSpec& spec, double r) {
    if (spec.family == KernelFamily::gaussian) {
        if (spec.gaussian_squared) {
            const double v = std::exp(-r * r / spec.sigma2);
            return {v, -2.0 / spec.sigma2 * v};
        }
        const double v = std::exp(-r / spec.sigma2);
        if (r == 0.0) {
            return {1.0, -std::numeric_limits<double>::infinity()};
        }
        return {v, -v / (spec.sigma2 * r)};
    }
    const double nu = spec.nu();
    if (r < kTinyRadius) {
        // (r^nu K_nu)' = -r^nu K_{nu-1}, so phi'(r)/r = -r^{nu-1} K_{nu-1}(r).
        const double d = nu > 1.0 ? -matern_origin_limit(nu - 1.0)
                                  : -std::numeric_limits<double>::infinity();
        return {matern_origin_limit(nu), d};
    }
    const auto [k_lower, k_nu] = bessel_k_pair(nu, r);
    const double r_nu1 = std::pow(r, nu - 1.0);
    return {r_nu1 * r * k_nu, -r_nu1 * k_lower};
}

double radial_value(const KernelSpec& spec, double r) {
    if (spec.family == KernelFamily::gaussian) {
        return spec.gaussian_squared ? std::exp(-r * r / spec.sigma2) : std::exp(-r / spec.sigma2);
    }
    const double nu = spec.nu();
    if (r < kTinyRadius) return matern_origin_limit(nu);
    if (is_half_integer(nu)) {
        return std::pow(r, nu) * k_half_integer(static_cast<int>(std::lround(nu - 0.5)), r);
    }
    return std::pow(r, nu) * bessel_k_pair(nu, r)[1];
}

double kernel_value(const KernelSpec& spec, const Vector& x, const Vector& y) {
    return radial_value(spec, (x - y).norm());
}

Vector kernel_gradient_x(const KernelSpec& spec, const Vector& x, const Vector& y) {
    if (!spec.gradient_smooth_at_origin()) {
        fail(ErrorKind::unsupported_smoothness,
             "kernel gradient needs nu > 1 (Matern) or the squared Gaussian exponent");
    }
    const Vector diff = x - y;
    const double r = diff.norm();
    if (r == 0.0) return Vector::Zero(x.size());
    return radial(spec, r).derivative_over_r * diff;
}

Matrix kernel_matrix(const KernelSpec& spec, const Matrix& a, const Matrix& b) {
    require(a.cols() == b.cols(), "kernel_matrix: point dimensions differ");
    Matrix k(a.rows(), b.rows());
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
            k(i, j) = radial_value(spec, (a.row(i) - b.row(j)).norm());
        }
    }
    return k;
}

GramFactorization::GramFactorization(const Matrix& gram) {
    require(gram.rows() == gram.cols(), "Gram matrix must be square");
    const Eigen::Index n = gram.rows();
    const double scale = n > 0 ? gram.trace() / double(n) : 1.0;
    constexpr std::array<double, 4> ladder{0.0, 1e-12, 1e-10, 1e-8};
    for (double level : ladder) {
        jitter_ = level * scale;
        if (jitter_ == 0.0) {
            llt_.compute(gram);
        } else {
            Matrix shifted = gram;
            shifted.diagonal().array() += jitter_;
            llt_.compute(shifted);
        }
        if (llt_.info() == Eigen::Success) {
            rcond_ = llt_.rcond();
            if (rcond_ > 0.0 && std::isfinite(rcond_)) return;
        }
    }
    std::ostringstream msg;
    msg << "Gram factorization failed at maximum jitter " << jitter_
        << " (condition estimate " << (rcond_ > 0.0 ? 1.0 / rcond_ : INFINITY) << ")";
    fail(ErrorKind::ill_conditioned, msg.str());
}

}  // namespace surfpde
