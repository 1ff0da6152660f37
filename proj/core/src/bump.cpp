#include "trunckern/bump.hpp"

#include <cmath>

#include "trunckern/errors.hpp"
#include "trunckern/quadrature.hpp"

namespace trunckern {

namespace {

// Quintic smoothstep S(t) = 6t^5 - 15t^4 + 10t^3 on [0, 1].
double smooth(double t) { return t * t * t * (10.0 + t * (-15.0 + 6.0 * t)); }
double smooth_d(double t) { return 30.0 * t * t * (t - 1.0) * (t - 1.0); }
double smooth_dd(double t) { return 60.0 * t * (2.0 * t - 1.0) * (t - 1.0); }

}  // namespace

double BumpProfile::beta(double q) {
    if (q <= 0.5) return 1.0;
    if (q >= 1.0) return 0.0;
    return 1.0 - smooth(2.0 * q - 1.0);
}

double BumpProfile::beta_prime(double q) {
    if (q <= 0.5 || q >= 1.0) return 0.0;
    return -2.0 * smooth_d(2.0 * q - 1.0);
}

double BumpProfile::beta_second(double q) {
    if (q <= 0.5 || q >= 1.0) return 0.0;
    return -4.0 * smooth_dd(2.0 * q - 1.0);
}

double BumpProfile::beta_curvature_bound() { return 40.0 / std::sqrt(3.0); }

double BumpProfile::beta_radial_moment(int d) {
    // ∫_0^1 r^{d-1} beta(r) dr with beta = 1 - S(2r - 1) on [1/2, 1]:
    //   d = 1: 3/4, d = 2: 2/7, d = 3: 33/224 (exact polynomial integrals).
    switch (d) {
        case 1: return 0.75;
        case 2: return 2.0 / 7.0;
        case 3: return 33.0 / 224.0;
        default: throw config_error("BumpProfile: radial moment implemented for d <= 3");
    }
}

double BumpProfile::eta(std::span<const double> x) const {
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    return beta(std::sqrt(r2) / R);
}

double bump_mu(const KernelParams& params) {
    params.validate();
    const double ball = sphere_surface(params.d) * BumpProfile::beta_radial_moment(params.d);
    return std::pow(2.0, -(params.d + 2.0 * params.s)) * params.lambda * ball;
}

}  // namespace trunckern
