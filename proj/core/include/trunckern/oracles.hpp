#pragma once

#include <functional>
#include <span>
#include <vector>

#include "trunckern/bump.hpp"
#include "trunckern/grid.hpp"
#include "trunckern/kernel.hpp"

namespace trunckern {

/// Reference evaluation of ∫ delta_y u(x) K(y) dy by adaptive quadrature over
/// dyadic shells, independent of the grid discretization. `u` must be
/// evaluable on all of R^d (an analytic closure or an extended grid function).
/// `gradient` feeds the compensator for s >= 1/2; symmetric kernels use a
/// symmetrized integrand unless `symmetrize` is false. `comp_radius` is the
/// s = 1/2 compensator cutoff radius (the choice is value-neutral for kernels
/// with the annulus cancellation property).
double brute_force_operator(const std::function<double(std::span<const double>)>& u,
                            const KernelFn& kernel, std::span<const double> x,
                            std::span<const double> gradient = {}, double comp_radius = 1.0,
                            bool symmetrize = true);

/// The one-dimensional 1/2-Laplacian of u(x) = x|x| eta(x) / 2 at |x| < 1:
/// 2x log|x| - x log(1 - x^2) plus the tail integral over the bump's support
/// annulus (adaptive quadrature). Sign convention: returns (-Delta)^{1/2} u,
/// the negative of the corresponding linear operator value.
double half_laplacian_example(double x, const BumpProfile& eta);

struct LemmaA1Row {
    double R = 0.0;
    double ratio_a = 0.0, bound_a = 0.0;       // tail mass * R^{2s} / Lambda
    double alpha_mid = 0.0;                    // a fixed exponent in (2s, 2)
    double ratio_b_mid = 0.0, bound_b_mid = 0.0;
    bool has_c = false;                        // s < 1/2 only
    double ratio_c = 0.0, bound_c = 0.0;       // small-ball first moment
    bool has_d = false;                        // s > 1/2 only
    double ratio_d = 0.0, bound_d = 0.0;       // exterior first moment
    double ratio_e = 0.0, bound_e = 0.0;       // small-ball second moment
    bool has_f = false;                        // s = 1/2, symmetric kernels
    double f_difference = 0.0;                 // compensator-radius sensitivity
    bool ok = true;
};

struct LemmaA1Report {
    std::vector<LemmaA1Row> rows;
    bool all_ok = true;
};

/// Kernel-integral ratio checks. Part (a) uses the closed form for the
/// built-in family; the moment parts always take the quadrature path so the
/// closed forms have an independent oracle.
LemmaA1Report lemma_a1_check(const KernelFn& kernel, std::span<const double> radii);

struct BumpBoundRow {
    double R = 0.0;
    double sup_minus_scaled = 0.0;    // ||M^- eta_R||_inf * R^{2s}
    double sup_plus_scaled = 0.0;     // ||M^+ eta_R||_inf * R^{2s}
    double boundary_min_scaled = 0.0; // min at the nodes nearest |x| = R, * R^{2s}
    double mu = 0.0;
    bool boundary_ok = false;
};

struct BumpBoundReport {
    std::vector<BumpBoundRow> rows;
    double sup_ratio_minus = 0.0;  // max/min across rows
    double sup_ratio_plus = 0.0;
    bool ok = false;
};

/// Scaling of the extremal operators on bumps: ||M^± eta_R|| R^{2s} must stay
/// in a fixed band across R, and M^- eta at the sphere |x| = R is bounded
/// below by mu (one-sided, conservative). `h` is the grid spacing used for
/// every R; needs at least 16 nodes across B_R.
BumpBoundReport bump_bound_check(const KernelParams& params, std::span<const double> R_list,
                                 double h);

struct PucciQuotientReport {
    double gamma = 0.0;
    double R = 0.0;  // support radius of phi
    double quotient_minus = 0.0;
    double quotient_plus = 0.0;
    bool degenerate = false;  // phi identically zero
};

/// Measured constant of the extremal-operator Hoelder propagation bound:
/// max over node pairs of |M^± phi(x) - M^± phi(y)| R^{2s} (R / |x-y|)^gamma,
/// with gamma = 1-2s, 1/2, 2-2s for s below, at, above 1/2.
PucciQuotientReport pucci_holder_quotient(const GridFunction& phi, const KernelParams& params);

}  // namespace trunckern
