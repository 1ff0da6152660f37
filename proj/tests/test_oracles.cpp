#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "trunckern/bump.hpp"
#include "trunckern/errors.hpp"
#include "trunckern/oracles.hpp"
#include "trunckern/quadrature.hpp"

using namespace trunckern;

namespace {

KernelParams params(double s, double rho, double Lambda = 1.0) {
    return KernelParams{1, s, 1.0, Lambda, rho};
}

/// Simpson-rule tail of the half-Laplacian example, independent of the
/// oracle's quadrature machinery.
double simpson_tail(double x, const BumpProfile& eta) {
    auto uprime = [&eta](double y) {
        const double ay = std::abs(y);
        return ay * eta.eta_radial(ay) + 0.5 * ay * ay * eta.eta_prime_radial(ay);
    };
    auto integrate = [&](double a, double b) {
        const int n = 4096;
        const double w = (b - a) / n;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const double l = a + i * w, r = l + w, m = 0.5 * (l + r);
            acc += (w / 6.0) *
                   (uprime(l) / (x - l) + 4.0 * uprime(m) / (x - m) + uprime(r) / (x - r));
        }
        return acc;
    };
    return integrate(1.0, eta.R) + integrate(-eta.R, -1.0);
}

}  // namespace

TEST_CASE("brute force: constants vanish") {
    auto kernel = make_truncated_fractional_kernel(params(0.5, 0.0), 1.0);
    auto u = [](std::span<const double>) { return 4.2; };
    const double x[1] = {0.3};
    CHECK(std::abs(brute_force_operator(u, kernel, x)) <= 1e-12);
}

TEST_CASE("brute force agrees with the closed-form example to high precision") {
    // This doubles as the oracle self-consistency check: the shell quadrature
    // reproduces an elementary-function reference far below the 1e-9 target.
    BumpProfile eta{2.0};
    auto u = [&eta](std::span<const double> y) {
        return 0.5 * y[0] * std::abs(y[0]) * eta.eta(y);
    };
    auto kernel = make_truncated_fractional_kernel(params(0.5, 0.0), 1.0);
    for (double x : {-0.25, -0.1, 0.1, 0.25}) {
        const double pt[1] = {x};
        const double brute = -brute_force_operator(u, kernel, pt);
        const double closed = half_laplacian_example(x, eta);
        CHECK(std::abs(brute - closed) <= 1e-9 * std::abs(closed));
        CHECK(std::abs(brute - closed) <= 1e-6);
    }
}

TEST_CASE("half-Laplacian example: elementary terms and conventions") {
    BumpProfile eta{2.0};

    // 0 log 0 = 0 convention at the origin
    CHECK(half_laplacian_example(0.0, eta) == 0.0);
    CHECK(std::abs(half_laplacian_example(1e-12, eta)) <= 1e-9);

    // first two terms at x = 1/2: 2x log|x| - x log(1 - x^2)
    const double main_half = 2.0 * 0.5 * std::log(0.5) - 0.5 * std::log(0.75);
    CHECK(main_half == doctest::Approx(-0.5493061443340549).epsilon(1e-15));
    CHECK(half_laplacian_example(0.5, eta) ==
          doctest::Approx(main_half + simpson_tail(0.5, eta)).epsilon(1e-9));

    // antisymmetry for the even bump
    for (double x : {0.1, 0.35, 0.8}) {
        CHECK(half_laplacian_example(-x, eta) ==
              doctest::Approx(-half_laplacian_example(x, eta)).epsilon(1e-13));
    }

    CHECK_THROWS_AS(half_laplacian_example(1.0, eta), config_error);
    CHECK_THROWS_AS(half_laplacian_example(-1.5, eta), config_error);
}

TEST_CASE("lemma checks: pure-kernel closed forms, R-independent") {
    const std::vector<double> radii = {0.1, 1.0, 10.0};
    for (double s : {0.25, 0.5, 0.75}) {
        auto kernel = make_truncated_fractional_kernel(params(s, 0.0), 1.0);
        LemmaA1Report rep = lemma_a1_check(kernel, radii);
        REQUIRE(rep.rows.size() == 3);
        for (const auto& row : rep.rows) {
            // (a) tail * R^{2s} = 1/s exactly (closed form)
            CHECK(std::abs(row.ratio_a - 1.0 / s) <= 1e-10);
            // (e) second moment * R^{2s-2} = 2/(2-2s), via the quadrature path
            CHECK(row.ratio_e ==
                  doctest::Approx(2.0 / (2.0 - 2.0 * s)).epsilon(1e-8));
            if (s < 0.5) {
                CHECK(row.has_c);
                CHECK(row.ratio_c == doctest::Approx(2.0 / (1.0 - 2.0 * s)).epsilon(1e-8));
            }
            if (s > 0.5) {
                CHECK(row.has_d);
                CHECK(row.ratio_d == doctest::Approx(2.0 / (2.0 * s - 1.0)).epsilon(1e-8));
            }
        }
    }
}

TEST_CASE("lemma checks: zero kernel stub and the s = 1/2 compensator part") {
    KernelParams p = params(0.5, 0.5, 2.0);
    auto zero = make_user_kernel([](std::span<const double>) { return 0.0; }, p, true, true);
    const std::vector<double> radii = {0.5, 2.0};
    LemmaA1Report rep = lemma_a1_check(zero, radii);
    for (const auto& row : rep.rows) {
        CHECK(row.ratio_a == 0.0);
        CHECK(row.ratio_b_mid == 0.0);
        CHECK(row.ratio_e == 0.0);
        CHECK(row.has_f);
        CHECK(row.f_difference <= 1e-9);
        CHECK(row.ok);
    }

    auto sym = make_truncated_fractional_kernel(params(0.5, 0.0, 2.0), 1.0);
    LemmaA1Report rep2 = lemma_a1_check(sym, radii);
    for (const auto& row : rep2.rows) {
        CHECK(row.has_f);
        CHECK(row.f_difference <= 1e-9);
        CHECK(row.ok);
    }
}

TEST_CASE("bump profile: construction invariants") {
    BumpProfile b{2.0};
    const double zero[1] = {0.0};
    CHECK(b.eta(zero) == 1.0);
    const double at_r[1] = {2.0};
    CHECK(b.eta(at_r) == 0.0);
    const double inside[1] = {0.9};
    CHECK(b.eta(inside) == 1.0);  // identically 1 on B_{R/2}

    // the transition is monotone with the recorded slope bound
    double max_slope = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        const double q = 0.5 + 0.5 * i / 1000.0;
        CHECK(BumpProfile::beta_prime(q) <= 0.0);
        max_slope = std::max(max_slope, -BumpProfile::beta_prime(q));
    }
    CHECK(max_slope == doctest::Approx(BumpProfile::beta_slope_bound()).epsilon(1e-5));

    // exact radial moment vs quadrature
    const double m1 = integrate_adaptive([](double r) { return BumpProfile::beta(r); }, 0.0, 1.0,
                                         1e-12, "beta moment");
    CHECK(m1 == doctest::Approx(BumpProfile::beta_radial_moment(1)).epsilon(1e-12));
    const double m2 = integrate_adaptive([](double r) { return r * BumpProfile::beta(r); }, 0.0,
                                         1.0, 1e-12, "beta moment d2");
    CHECK(m2 == doctest::Approx(BumpProfile::beta_radial_moment(2)).epsilon(1e-12));

    // mu closed form: d=1, s=1/2, lambda=1 gives 2^{-2} * (3/2) = 3/8
    CHECK(bump_mu(KernelParams{1, 0.5, 1.0, 2.0, 0.0}) == doctest::Approx(0.375).epsilon(1e-15));
}

TEST_CASE("bump bound check: scaling band and boundary floor") {
    KernelParams p = params(0.5, 0.0, 2.0);
    const std::vector<double> R_list = {1.0, 2.0, 4.0};
    BumpBoundReport rep = bump_bound_check(p, R_list, 1.0 / 64.0);
    REQUIRE(rep.rows.size() == 3);
    CHECK(rep.ok);  // boundary minimum clears mu on every row
    CHECK(rep.sup_ratio_minus <= 1.5);
    CHECK(rep.sup_ratio_plus <= 1.5);
    for (const auto& row : rep.rows) {
        CHECK(row.boundary_min_scaled >= row.mu * 0.98);
        CHECK(row.sup_minus_scaled > 0.0);
    }

    CHECK_THROWS_AS(bump_bound_check(p, R_list, 0.5), config_error);  // under-resolved
    KernelParams pr = params(0.5, 2.0, 2.0);
    CHECK_THROWS_AS(bump_bound_check(pr, R_list, 1.0 / 64.0), config_error);  // R <= rho
}

TEST_CASE("pucci quotient: exponent switch is exact") {
    GridSpec g;
    g.d = 1;
    g.L = 2.0;
    g.n = 257;
    g.extension = Extension::constant(0.0);
    BumpProfile profile{1.0};
    GridFunction phi = sample_profile(g, [&](std::span<const double> x) { return profile.eta(x); });

    // exact at dyadic s (the three sample orders all give 1/2)
    for (auto [s, gamma] : std::initializer_list<std::pair<double, double>>{
             {0.25, 0.5}, {0.5, 0.5}, {0.75, 0.5}}) {
        PucciQuotientReport rep = pucci_holder_quotient(phi, params(s, 0.0, 2.0));
        CHECK(rep.gamma == gamma);
        CHECK_FALSE(rep.degenerate);
        CHECK(rep.quotient_minus > 0.0);
        CHECK(rep.R == doctest::Approx(1.0).epsilon(0.02));
    }
    // branch selection away from the critical order
    CHECK(pucci_holder_quotient(phi, params(0.3, 0.0, 2.0)).gamma ==
          doctest::Approx(0.4).epsilon(1e-15));
    CHECK(pucci_holder_quotient(phi, params(0.7, 0.0, 2.0)).gamma ==
          doctest::Approx(0.6).epsilon(1e-15));

    GridFunction zero(g, 0.0);
    PucciQuotientReport rep0 = pucci_holder_quotient(zero, params(0.5, 0.0, 2.0));
    CHECK(rep0.degenerate);
    CHECK(rep0.quotient_minus == 0.0);
}

TEST_CASE("pucci quotient: stable across scales") {
    KernelParams p = params(0.5, 0.0, 2.0);
    double qmin = 1e300, qmax = 0.0;
    for (double R : {1.0, 2.0, 4.0}) {
        GridSpec g;
        g.d = 1;
        g.L = 2.0 * R;
        g.n = (int)std::lround(2.0 * g.L * 64.0) + 1;
        g.extension = Extension::constant(0.0);
        BumpProfile profile{R};
        GridFunction phi =
            sample_profile(g, [&](std::span<const double> x) { return profile.eta(x); });
        PucciQuotientReport rep = pucci_holder_quotient(phi, p);
        const double q = std::max(rep.quotient_minus, rep.quotient_plus);
        qmin = std::min(qmin, q);
        qmax = std::max(qmax, q);
    }
    CHECK(qmax / qmin <= 1.5);
}
