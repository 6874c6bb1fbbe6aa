#pragma once

#include "stratiwave/config.hpp"

namespace stratiwave {

// Vertical profiles for layer j and horizontal wavenumber |k|: solutions of
//   psi'' = (|k|^2 - alpha_j^2) psi   on  d_{j-1} < z < d_j
// with psi(d_{j-1}) = 0, psi(d_j) = 1, and phi the mirror image
// (phi(d_{j-1}) = 1, phi(d_j) = 0).  Depending on the sign of
// s = (|k|^2 - alpha_j^2) h_j^2 the solution is a sinh, linear, or sin
// profile; all three branches are evaluated through one analytic kernel so
// the values are continuous across |k| = |alpha_j|.
//
// Throws ResonanceError when the sin branch is (numerically) resonant, i.e.
// sqrt(alpha_j^2 - |k|^2) h_j is an integer multiple of pi.
double psi(const FluidStack& fs, int j, double kmag, double z);
double psi_prime(const FluidStack& fs, int j, double kmag, double z);
double phi(const FluidStack& fs, int j, double kmag, double z);
double phi_prime(const FluidStack& fs, int j, double kmag, double z);

namespace detail {
// f(x, s) = sum_{n>=0} x^{2n+1} s^n / (2n+1)!  (= sinh(sqrt(s) x)/sqrt(s)
// for s > 0, x for s = 0, sin(sqrt(-s) x)/sqrt(-s) for s < 0) and its
// x-derivative.  Power series is used for |s| < 1e-4.
double osc_f(double x, double s);
double osc_fp(double x, double s);
} // namespace detail

} // namespace stratiwave
