#include "stratiwave/vertical_modes.hpp"

#include <cmath>

namespace stratiwave {

namespace detail {

double osc_f(double x, double s) {
    if (std::abs(s) >= 1e-4) {
        if (s > 0.0) {
            const double q = std::sqrt(s);
            return std::sinh(q * x) / q;
        }
        const double w = std::sqrt(-s);
        return std::sin(w * x) / w;
    }
    // series in u = s x^2; with |s| < 1e-4 and |x| <= 1 six terms reach
    // full double precision
    const double u = s * x * x;
    double term = 1.0, sum = 1.0;
    const double denom[6] = {6.0, 20.0, 42.0, 72.0, 110.0, 156.0};  // (2n)(2n+1)
    for (int i = 0; i < 6; ++i) {
        term *= u / denom[i];
        sum += term;
    }
    return x * sum;
}

double osc_fp(double x, double s) {
    if (std::abs(s) >= 1e-4) {
        if (s > 0.0) return std::cosh(std::sqrt(s) * x);
        return std::cos(std::sqrt(-s) * x);
    }
    const double u = s * x * x;
    double term = 1.0, sum = 1.0;
    const double denom[6] = {2.0, 12.0, 30.0, 56.0, 90.0, 132.0};  // (2n-1)(2n)
    for (int i = 0; i < 6; ++i) {
        term *= u / denom[i];
        sum += term;
    }
    return sum;
}

} // namespace detail

namespace {

struct LayerMode {
    double h, s, zeta, f1;
};

LayerMode prepare(const FluidStack& fs, int j, double kmag, double z) {
    if (j < 1 || j > fs.m())
        throw ConfigError("layer index " + std::to_string(j) + " outside [1, " +
                          std::to_string(fs.m()) + "]");
    const double h = fs.h(j);
    if (z < fs.d(j - 1) - 1e-12 * h || z > fs.d(j) + 1e-12 * h)
        throw ConfigError("z = " + std::to_string(z) + " outside layer " + std::to_string(j));
    const double a = fs.alpha(j);
    const double s = (kmag * kmag - a * a) * h * h;
    if (s <= -1e-4) {
        const double w = std::sqrt(-s);
        if (std::abs(std::sin(w)) < 1e-12)
            throw ResonanceError("vertical mode resonance in layer " + std::to_string(j) +
                                 ": sqrt(alpha^2 - |k|^2) h = " + std::to_string(w) +
                                 " is a multiple of pi");
    }
    return {h, s, (z - fs.d(j - 1)) / h, detail::osc_f(1.0, s)};
}

} // namespace

double psi(const FluidStack& fs, int j, double kmag, double z) {
    const auto m = prepare(fs, j, kmag, z);
    return detail::osc_f(m.zeta, m.s) / m.f1;
}

double psi_prime(const FluidStack& fs, int j, double kmag, double z) {
    const auto m = prepare(fs, j, kmag, z);
    return detail::osc_fp(m.zeta, m.s) / (m.h * m.f1);
}

double phi(const FluidStack& fs, int j, double kmag, double z) {
    const auto m = prepare(fs, j, kmag, z);
    return detail::osc_f(1.0 - m.zeta, m.s) / m.f1;
}

double phi_prime(const FluidStack& fs, int j, double kmag, double z) {
    const auto m = prepare(fs, j, kmag, z);
    return -detail::osc_fp(1.0 - m.zeta, m.s) / (m.h * m.f1);
}

} // namespace stratiwave
