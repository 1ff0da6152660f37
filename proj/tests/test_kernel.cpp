#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "trunckern/errors.hpp"
#include "trunckern/kernel.hpp"
#include "trunckern/quadrature.hpp"

using namespace trunckern;

namespace {

KernelParams params(double s, double rho, double lambda = 1.0, double Lambda = 2.0, int d = 1) {
    return KernelParams{d, s, lambda, Lambda, rho};
}

// Independent oracle for the annulus integral of the asymmetric tilt example.
double tilt_annulus_oracle(const KernelParams& p, double r) {
    auto g = [&p](std::span<const double> y) {
        double r2 = 0.0;
        for (double v : y) r2 += v * v;
        const double base = lower_envelope(p, std::sqrt(r2));
        return (y[0] > 0.0) ? 1.5 * base : base;
    };
    return annulus_integral(p.d, r, 2.0 * r, g, 64, 1e-10, "tilt oracle");
}

}  // namespace

TEST_CASE("truncated kernel point values") {
    auto k = make_truncated_fractional_kernel(params(0.25, 1.0), 1.0);
    const double y1[1] = {0.5};
    CHECK(k.eval(std::span<const double>(y1, 1)) == doctest::Approx(1.0));  // capped region
    const double y2[1] = {2.0};
    CHECK(k.eval(std::span<const double>(y2, 1)) == doctest::Approx(std::pow(2.0, -1.5)));
    CHECK(k.is_symmetric);
    CHECK(k.is_integrable);
}

TEST_CASE("rho = 0 convention: pure power law, non-integrable") {
    auto k = make_truncated_fractional_kernel(params(0.25, 0.0), 2.0);
    const double y[1] = {0.25};
    CHECK(k.eval(std::span<const double>(y, 1)) ==
          doctest::Approx(2.0 * std::pow(0.25, -1.5)));
    CHECK_FALSE(k.is_integrable);
    CHECK_FALSE(kernel_l1_norm(k).has_value());
}

TEST_CASE("kernel construction rejects bad inputs") {
    CHECK_THROWS_AS(make_truncated_fractional_kernel(params(0.25, 1.0), 0.5), config_error);
    CHECK_THROWS_AS(make_truncated_fractional_kernel(params(0.0, 1.0), 1.0), config_error);
    CHECK_THROWS_AS(make_truncated_fractional_kernel(params(0.5, -1.0), 1.0), config_error);
    KernelParams p = params(0.5, 1.0);
    p.lambda = -1.0;
    CHECK_THROWS_AS(make_truncated_fractional_kernel(p, 1.0), config_error);
}

TEST_CASE("kernel_l1_norm closed forms") {
    // d=1, s=1/4, rho=1: mass = (2 + 1/s) rho^{-2s} = 6
    auto k1 = make_truncated_fractional_kernel(params(0.25, 1.0), 1.0);
    CHECK(kernel_l1_norm(k1).value() == doctest::Approx(6.0).epsilon(1e-14));
    // same family at rho = 4: 6 * 4^{-1/2} = 3
    auto k4 = make_truncated_fractional_kernel(params(0.25, 4.0), 1.0);
    CHECK(kernel_l1_norm(k4).value() == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("mass scaling: L1 norm times rho^{2s} is constant in rho") {
    for (double s : {0.25, 0.5, 0.75}) {
        double ref = 0.0;
        for (double rho : {0.25, 1.0, 4.0}) {
            auto k = make_truncated_fractional_kernel(params(s, rho), 1.0);
            const double scaled = kernel_l1_norm(k).value() * std::pow(rho, 2.0 * s);
            if (ref == 0.0) ref = scaled;
            CHECK(scaled == doctest::Approx(ref).epsilon(1e-13));
        }
    }
}

TEST_CASE("annulus_mass closed form and quadrature agree") {
    // pure kernel d=1, s=1/2 at r=1: 2 * int_1^2 y^{-2} dy = 1
    auto k = make_truncated_fractional_kernel(params(0.5, 0.0), 1.0);
    CHECK(annulus_mass(k, 1.0) == doctest::Approx(1.0).epsilon(1e-13));

    // user-wrapped copy of the same kernel goes through quadrature
    KernelParams p = params(0.5, 0.0);
    auto user = make_user_kernel(
        [p](std::span<const double> y) { return lower_envelope(p, std::abs(y[0])); }, p, true);
    CHECK(annulus_mass(user, 1.0) == doctest::Approx(1.0).epsilon(1e-7));

    // zero kernel
    auto zero = make_user_kernel([](std::span<const double>) { return 0.0; }, p, true);
    CHECK(annulus_mass(zero, 1.0) == doctest::Approx(0.0));
}

TEST_CASE("truncation inactive beyond rho; monotone in rho") {
    auto pure = make_truncated_fractional_kernel(params(0.3, 0.0), 1.0);
    auto trunc = make_truncated_fractional_kernel(params(0.3, 0.5), 1.0);
    CHECK(annulus_mass(trunc, 0.5) == doctest::Approx(annulus_mass(pure, 0.5)).epsilon(1e-13));

    // pointwise and annulus monotonicity in rho
    auto k_fine = make_truncated_fractional_kernel(params(0.3, 0.25), 1.0);
    for (double y : {0.05, 0.1, 0.3, 0.7}) {
        const double yy[1] = {y};
        CHECK(k_fine.eval(std::span<const double>(yy, 1)) >=
              trunc.eval(std::span<const double>(yy, 1)) - 1e-15);
    }
    for (double r : {0.05, 0.2, 0.6}) {
        CHECK(annulus_mass(k_fine, r) >= annulus_mass(trunc, r) - 1e-12);
    }
}

TEST_CASE("validate_ellipticity: pure kernel annulus constant") {
    // d=1 pure kernel mass over B_{2r}\B_r is ((1-2^{-2s})/s) r^{-2s}; the
    // bound holds iff Lambda >= that constant.
    const double s = 0.3;
    const double annulus_const = (1.0 - std::pow(2.0, -2.0 * s)) / s;
    std::vector<double> radii = geometric_radii(0.01, 10.0);

    KernelParams ok_params = params(s, 0.0, 1.0, annulus_const * 1.0001);
    auto ok_kernel = make_truncated_fractional_kernel(ok_params, 1.0);
    CHECK(validate_ellipticity(ok_kernel, radii).annulus_bound_ok);

    KernelParams bad_params = params(s, 0.0, 1.0, annulus_const * 0.999);
    auto bad_kernel = make_truncated_fractional_kernel(bad_params, 1.0);
    auto rep = validate_ellipticity(bad_kernel, radii);
    CHECK_FALSE(rep.annulus_bound_ok);
    CHECK(rep.max_annulus_ratio == doctest::Approx(annulus_const / bad_params.Lambda).epsilon(1e-10));
}

TEST_CASE("validate_ellipticity: equality case and violation") {
    std::vector<double> radii = {0.1, 0.5, 1.0, 2.0};
    // scale = lambda: lower bound holds with ratio exactly 1
    auto k = make_truncated_fractional_kernel(params(0.4, 0.5, 1.0, 4.0), 1.0);
    auto rep = validate_ellipticity(k, radii);
    CHECK(rep.lower_bound_ok);
    CHECK(rep.worst_lower_ratio == doctest::Approx(1.0));

    // a kernel scaled by lambda/2 violates the lower bound
    KernelParams p = params(0.4, 0.5, 1.0, 4.0);
    auto weak = make_user_kernel(
        [p](std::span<const double> y) {
            return 0.5 * lower_envelope(p, std::abs(y[0]));
        },
        p, true);
    auto rep2 = validate_ellipticity(weak, radii);
    CHECK_FALSE(rep2.lower_bound_ok);
    CHECK(rep2.worst_lower_ratio == doctest::Approx(0.5));

    // negative kernels are caught by the lower bound
    auto neg = make_user_kernel([](std::span<const double>) { return -1.0; }, p, false);
    CHECK_FALSE(validate_ellipticity(neg, radii).lower_bound_ok);
}

TEST_CASE("validate_ellipticity: symmetry check at s = 1/2") {
    std::vector<double> radii = {0.25, 1.0, 4.0};
    auto sym = make_truncated_fractional_kernel(params(0.5, 1.0, 1.0, 4.0), 1.0);
    auto rep = validate_ellipticity(sym, radii);
    CHECK(rep.symmetry_checked);
    CHECK(rep.symmetry_ok);
    CHECK(rep.max_symmetry_ratio == doctest::Approx(0.0));

    // the asymmetric tilt violates the cancellation condition at s = 1/2
    KernelParams p = params(0.5, 1.0, 1.0, 4.0);
    auto tilt = make_user_kernel(
        [p](std::span<const double> y) {
            const double base = lower_envelope(p, std::abs(y[0]));
            return (y[0] > 0.0) ? 1.5 * base : base;
        },
        p, false);
    auto rep2 = validate_ellipticity(tilt, radii);
    CHECK(rep2.symmetry_checked);
    CHECK_FALSE(rep2.symmetry_ok);

    // no symmetry check away from the critical order
    auto off = make_truncated_fractional_kernel(params(0.4, 1.0, 1.0, 4.0), 1.0);
    CHECK_FALSE(validate_ellipticity(off, radii).symmetry_checked);
}

TEST_CASE("asymmetric tilt stays in the class when Lambda leaves room") {
    // eval = lambda-envelope * (1 + 0.5 * 1_{y_1 > 0}): annulus quadrature
    // oracle confirms the mass bound for generous Lambda.
    const double s = 0.5;
    const double annulus_const = (1.0 - std::pow(2.0, -2.0 * s)) / s;  // = 1 at s = 1/2
    KernelParams p = params(s, 0.5, 1.0, 1.25 * annulus_const * 1.05);
    auto tilt = make_user_kernel(
        [p](std::span<const double> y) {
            const double base = lower_envelope(p, std::abs(y[0]));
            return (y[0] > 0.0) ? 1.5 * base : base;
        },
        p, false, true);
    std::vector<double> radii = geometric_radii(0.5, 8.0);  // truncation-inactive radii
    auto rep = validate_ellipticity(tilt, radii);
    CHECK(rep.lower_bound_ok);
    CHECK(rep.annulus_bound_ok);
    for (double r : radii) {
        CHECK(annulus_mass(tilt, r) == doctest::Approx(tilt_annulus_oracle(p, r)).epsilon(1e-7));
    }
}

TEST_CASE("built-in family passes validation across an (s, rho) grid") {
    for (double s : {0.2, 0.5, 0.8}) {
        for (double rho : {0.0, 0.125, 1.0}) {
            const double annulus_const = (1.0 - std::pow(2.0, -2.0 * s)) / s;
            KernelParams p = params(s, rho, 1.0, 1.5 * annulus_const);
            auto k = make_truncated_fractional_kernel(p, 1.0);
            auto rep = validate_ellipticity(k, geometric_radii(0.01, 8.0));
            CHECK(rep.ok());
            CHECK(rep.class_nonempty_ok);
        }
    }
}

TEST_CASE("builtin radial moment closed forms") {
    // tail: d=1 pure kernel, int_{|y|>R} |y|^{-1-2s} dy = R^{-2s}/s
    KernelParams p = params(0.25, 0.0);
    CHECK(builtin_tail_mass(p, 1.0, 2.0) ==
          doctest::Approx(std::pow(2.0, -0.5) / 0.25).epsilon(1e-14));
    // second moment: 2 R^{2-2s} / (2-2s)
    CHECK(builtin_radial_moment(p, 1.0, 2.0, 0.0, 1.5) ==
          doctest::Approx(2.0 * std::pow(1.5, 1.5) / 1.5).epsilon(1e-14));
    // divergent requests are rejected
    CHECK_THROWS_AS(builtin_radial_moment(p, 1.0, 0.0, 0.0, 1.0), numerical_error);
}
