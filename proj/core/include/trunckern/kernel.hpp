#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace trunckern {

/// Parameters (d, s, lambda, Lambda, rho) fixing the ellipticity class.
/// rho == 0 is the untruncated convention: the capped power law collapses to
/// the pure power law |y|^{-d-2s}.
struct KernelParams {
    int d = 1;
    double s = 0.5;
    double lambda = 1.0;
    double Lambda = 1.0;
    double rho = 0.0;

    bool truncated() const { return rho > 0.0; }

    /// Throws config_error unless d >= 1, 0 < s < 1, lambda > 0, Lambda > 0,
    /// rho >= 0 and all entries are finite.
    void validate() const;
};

/// A concrete kernel y -> K(y) with metadata. The built-in truncated
/// fractional family carries closed-form radial integrals; user kernels fall
/// back to quadrature.
struct KernelFn {
    std::function<double(std::span<const double>)> eval;
    bool is_symmetric = false;
    bool is_integrable = false;
    KernelParams params;
    /// r -> integral of K over the annulus B_{2r} \ B_r, when known analytically.
    std::function<double(double)> closed_form_annulus_mass;

    /// Built-in family flag: K(y) = scale * min{|y|^{-d-2s}, rho^{-d-2s}}.
    bool builtin = false;
    double scale = 0.0;

    double operator()(std::span<const double> y) const { return eval(y); }
};

/// Outcome of checking the class conditions on sampled annuli.
struct ValidationReport {
    bool lower_bound_ok = false;
    double worst_lower_ratio = 0.0;  // min over nodes of K / K_low; >= 1 passes
    bool annulus_bound_ok = false;
    double max_annulus_ratio = 0.0;  // max over r of mass / (Lambda r^{-2s}); <= 1 passes
    bool symmetry_checked = false;   // performed only when s == 1/2
    bool symmetry_ok = true;
    double max_symmetry_ratio = 0.0;  // max over r of |∫ y K| / (r Lambda r^{-2s})
    bool class_nonempty_ok = false;   // advisory: the lower envelope obeys the annulus bound
    std::vector<double> sampled_radii;

    bool ok() const { return lower_bound_ok && annulus_bound_ok && symmetry_ok; }
};

/// Radial value of the lower envelope lambda * min{r^{-d-2s}, rho^{-d-2s}}.
double lower_envelope(const KernelParams& p, double r);

/// K(y) = scale * min{|y|^{-d-2s}, rho^{-d-2s}}. Requires scale >= lambda so
/// the pointwise lower bound holds by construction; rejects non-finite params.
KernelFn make_truncated_fractional_kernel(const KernelParams& params, double scale);

/// Wraps an arbitrary nonnegative kernel. No closed forms; downstream
/// operations use quadrature. Validation is a separate step.
KernelFn make_user_kernel(std::function<double(std::span<const double>)> eval,
                          const KernelParams& params, bool symmetric,
                          bool integrable = false);

/// Checks the pointwise lower bound and the annulus-integral upper bound on
/// the sampled radii (plus the first-moment cancellation when s == 1/2),
/// using `quadrature_nodes_per_annulus` midpoint nodes per annulus.
ValidationReport validate_ellipticity(const KernelFn& kernel, std::span<const double> radii,
                                      int quadrature_nodes_per_annulus = 64);

/// Integral of K over B_{2r} \ B_r: closed form when available, otherwise
/// polar product quadrature refined to 1e-8.
double annulus_mass(const KernelFn& kernel, double r);

/// Total mass of K; nullopt means infinite (untruncated built-in family or a
/// user kernel flagged non-integrable).
std::optional<double> kernel_l1_norm(const KernelFn& kernel);

/// Closed-form ∫_{a<|y|<b} |y|^alpha K(y) dy for the built-in family
/// (b may be +infinity when alpha < 2s). Throws numerical_error on divergence.
double builtin_radial_moment(const KernelParams& p, double scale, double alpha,
                             double a, double b);

/// Closed-form tail mass ∫_{|y|>a} K(y) dy for the built-in family.
double builtin_tail_mass(const KernelParams& p, double scale, double a);

/// Geometric radius grid {r_min * 2^k} up to r_max, for annulus-bound sampling.
std::vector<double> geometric_radii(double r_min, double r_max);

}  // namespace trunckern
