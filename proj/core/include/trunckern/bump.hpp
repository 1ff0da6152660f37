#pragma once

#include <span>

#include "trunckern/kernel.hpp"

namespace trunckern {

/// Radial bump profile eta(x) = beta(|x| / R) built from a fixed quintic
/// spline: beta = 1 on [0, 1/2], 0 beyond 1, C^2 transition in between with
/// vanishing first and second derivatives at both ends.
struct BumpProfile {
    double R = 1.0;

    static double beta(double q);
    static double beta_prime(double q);
    static double beta_second(double q);

    /// sup |beta'| = 15/4 (attained mid-transition).
    static double beta_slope_bound() { return 3.75; }
    /// sup |beta''| = 40 / sqrt(3).
    static double beta_curvature_bound();

    /// Exact ∫_0^1 r^{d-1} beta(r) dr (polynomial integral), d <= 3.
    static double beta_radial_moment(int d);

    double eta(std::span<const double> x) const;
    double eta_radial(double r) const { return beta(r / R); }
    double eta_prime_radial(double r) const { return beta_prime(r / R) / R; }

    double grad_bound() const { return beta_slope_bound() / R; }
    double hess_bound() const { return beta_curvature_bound() / (R * R); }
};

/// mu = 2^{-d-2s} lambda ∫_{B_1} beta(|y|) dy, the closed-form lower-bound
/// constant for the extremal operator of the bump on the sphere |x| = R.
double bump_mu(const KernelParams& params);

}  // namespace trunckern
