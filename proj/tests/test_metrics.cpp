#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "trunckern/errors.hpp"
#include "trunckern/metrics.hpp"

using namespace trunckern;

namespace {

GridSpec grid1d(int n, double L, double ext_value = 0.0) {
    GridSpec g;
    g.d = 1;
    g.L = L;
    g.n = n;
    g.extension = Extension::constant(ext_value);
    return g;
}

/// Synthetic space-time field sampled from a closure u(x, t).
SpaceTimeField make_field(const GridSpec& g, double T, int steps,
                          const std::function<double(double, double)>& u) {
    SpaceTimeField field;
    field.grid = g;
    field.dt = T / steps;
    for (int k = 0; k <= steps; ++k) {
        const double t = (k == steps) ? 0.0 : -T + k * field.dt;
        field.times.push_back(t);
        std::vector<double> snap(g.node_count());
        for (int i = 0; i < g.n; ++i) snap[(std::size_t)i] = u(g.coord(i), t);
        field.snapshots.push_back(std::move(snap));
    }
    return field;
}

Cylinder origin_cylinder(double R, double s) { return Cylinder{{0.0}, 0.0, R, s}; }

}  // namespace

TEST_CASE("parabolic distance: pinned values and metric axioms") {
    const double p0[2] = {0.0, -1.0};
    const double q0[2] = {0.0, 0.0};
    CHECK(parabolic_distance(p0, q0, 0.5) == doctest::Approx(1.0));
    CHECK(parabolic_distance(p0, p0, 0.5) == 0.0);
    const double p1[2] = {1.0, 0.0};
    const double q1[2] = {0.0, -16.0};
    CHECK(parabolic_distance(p1, q1, 0.5) == doctest::Approx(16.0));

    // Symmetry and identity hold for every s. The triangle inequality holds
    // for d itself only when 2s >= 1; in general d^{min(1,2s)} is the max of
    // two metrics (|x-y|^{min(1,2s)} and |t-tau| are both subadditive).
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> unif(-2.0, 0.0);
    for (int trial = 0; trial < 200; ++trial) {
        double a[2] = {unif(rng) + 1.0, unif(rng)};
        double b[2] = {unif(rng) + 1.0, unif(rng)};
        double c[2] = {unif(rng) + 1.0, unif(rng)};
        const double s = 0.3 + 0.4 * std::abs(unif(rng));
        const double q = std::min(1.0, 2.0 * s);
        const double dab = parabolic_distance(a, b, s);
        CHECK(dab == parabolic_distance(b, a, s));
        CHECK(dab >= 0.0);
        CHECK(std::pow(dab, q) <= std::pow(parabolic_distance(a, c, s), q) +
                                      std::pow(parabolic_distance(c, b, s), q) + 1e-12);
    }
}

TEST_CASE("partial Hoelder seminorm: constant and linear fields") {
    GridSpec g = grid1d(65, 1.0);
    SpaceTimeField cf = make_field(g, 1.0, 16, [](double, double) { return 2.0; });
    Cylinder Q = origin_cylinder(0.5, 0.75);
    RegularityReport rep = partial_holder_seminorm(cf, Q, 0.0, 1.0);
    CHECK(rep.seminorm == 0.0);
    CHECK_FALSE(rep.degenerate);

    // u = x_1: with alpha = 1 the quotient peaks at 1 on equal-time pairs
    SpaceTimeField lf = make_field(g, 1.0, 16, [](double x, double) { return x; });
    RegularityReport rep2 = partial_holder_seminorm(lf, Q, 0.0, 1.0);
    CHECK(rep2.seminorm == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep2.argmax_p.size() == 2);
    // the maximizing pair shares a time slice
    CHECK(rep2.argmax_p[1] == rep2.argmax_q[1]);

    // cutoff at the cylinder diameter leaves no admissible pairs
    RegularityReport rep3 = partial_holder_seminorm(lf, Q, 10.0, 1.0);
    CHECK(rep3.degenerate);
    CHECK(rep3.pairs_evaluated == 0);
}

TEST_CASE("partial Hoelder seminorm: monotone in the cutoff and the cylinder") {
    GridSpec g = grid1d(65, 1.0);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    SpaceTimeField f = make_field(g, 1.0, 24, [&](double x, double t) {
        return std::sin(5.0 * x) + 0.3 * std::cos(7.0 * t) + 0.1 * unif(rng);
    });
    Cylinder Q = origin_cylinder(0.75, 0.5);
    const double alpha = 0.6;
    double prev = 1e300;
    for (double rho : {0.0, 0.05, 0.2, 0.5}) {
        const double sn = partial_holder_seminorm(f, Q, rho, alpha).seminorm;
        CHECK(sn <= prev + 1e-13);
        prev = sn;
    }
    Cylinder Qs = origin_cylinder(0.4, 0.5);
    CHECK(partial_holder_seminorm(f, Qs, 0.0, alpha).seminorm <=
          partial_holder_seminorm(f, Q, 0.0, alpha).seminorm + 1e-13);
}

TEST_CASE("seminorm and harnack ratio scale correctly under u -> c u") {
    GridSpec g = grid1d(65, 1.0, 0.5);
    SpaceTimeField f = make_field(g, 1.0, 16, [](double x, double t) {
        return 1.0 + 0.5 * std::sin(3.0 * x) * std::exp(t);
    });
    SpaceTimeField f3 = f;
    for (auto& snap : f3.snapshots)
        for (double& v : snap) v *= 3.0;
    f3.grid.extension = Extension::constant(1.5);

    Cylinder Q = origin_cylinder(0.5, 0.5);
    const double s1 = partial_holder_seminorm(f, Q, 0.01, 0.5).seminorm;
    const double s3 = partial_holder_seminorm(f3, Q, 0.01, 0.5).seminorm;
    CHECK(s3 == doctest::Approx(3.0 * s1).epsilon(1e-12));

    const double c1 = weak_harnack_ratio(f, Q, 0.0).empirical_c;
    const double c3 = weak_harnack_ratio(f3, Q, 0.0).empirical_c;
    CHECK(c3 == doctest::Approx(c1).epsilon(1e-12));
}

TEST_CASE("weak Harnack: constant field anchors") {
    // u = 1: mass = (1 - 2^{-2s})/s (d = 1), inf = 1, c = s/(1 - 2^{-2s});
    // equal to 1 at s = 1/2. The plain-average constant is 1.
    GridSpec g = grid1d(1025, 2.0, 1.0);
    SpaceTimeField f = make_field(g, 1.5, 64, [](double, double) { return 1.0; });
    for (double s : {0.25, 0.5, 0.75}) {
        Cylinder Q = origin_cylinder(1.0, s);
        HarnackReport rep = weak_harnack_ratio(f, Q, 0.0);
        const double expected_mass = (1.0 - std::pow(2.0, -2.0 * s)) / s;
        CHECK(rep.weighted_mass == doctest::Approx(expected_mass).epsilon(1e-4));
        CHECK(rep.inf_value == 1.0);
        CHECK(rep.empirical_c == doctest::Approx(1.0 / expected_mass).epsilon(1e-4));
        CHECK(rep.empirical_c_plain == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("weak Harnack: hypothesis enforcement and degenerate fields") {
    GridSpec g = grid1d(129, 1.0, 0.0);
    Cylinder Q = origin_cylinder(0.5, 0.5);

    SpaceTimeField zf = make_field(g, 1.0, 8, [](double, double) { return 0.0; });
    HarnackReport rep = weak_harnack_ratio(zf, Q, 0.0);
    CHECK(rep.degenerate);
    CHECK(rep.empirical_c == 0.0);

    SpaceTimeField neg = make_field(g, 1.0, 8, [](double x, double) { return x; });
    CHECK_THROWS_AS(weak_harnack_ratio(neg, Q, 0.0), numerical_error);

    GridSpec gneg = grid1d(129, 1.0, -0.2);
    SpaceTimeField negext = make_field(gneg, 1.0, 8, [](double, double) { return 1.0; });
    CHECK_THROWS_AS(weak_harnack_ratio(negext, Q, 0.0), numerical_error);
}

TEST_CASE("oscillation decay: basic shape") {
    GridSpec g = grid1d(513, 1.0);
    SpaceTimeField cf = make_field(g, 1.0, 32, [](double, double) { return 4.0; });
    OscillationDecay dec = oscillation_decay(cf, 0.5, 3, 0.5);
    CHECK(dec.osc.size() == 4);
    for (double o : dec.osc) CHECK(o == 0.0);

    SpaceTimeField rf = make_field(g, 1.0, 64, [](double x, double t) {
        return std::sin(9.0 * x) * std::exp(0.5 * t);
    });
    OscillationDecay dec2 = oscillation_decay(rf, 0.5, 3, 0.5);
    for (std::size_t k = 1; k < dec2.osc.size(); ++k) CHECK(dec2.osc[k] <= dec2.osc[k - 1] + 1e-15);

    // levels beyond the resolution truncate with a warning
    OscillationDecay dec3 = oscillation_decay(rf, 0.5, 12, 0.5);
    CHECK(dec3.truncated);
    CHECK(dec3.osc.size() < 13);
}

TEST_CASE("estimate_alpha: synthetic exponent recovery") {
    GridSpec g = grid1d(2049, 1.0);

    // u = d((x,t),(0,0))^{0.3}: osc over Q_{4^{-k}R} is exactly (4^{-k}R)^{0.3}
    SpaceTimeField f3 = make_field(g, 1.0, 512, [](double x, double t) {
        return std::pow(std::max(std::abs(x), std::sqrt(-t)), 0.3);
    });
    Cylinder Q = origin_cylinder(0.5, 0.5);
    AlphaEstimate est = estimate_alpha(f3, Q, 0.0);
    CHECK_FALSE(est.degenerate);
    CHECK(est.alpha_hat == doctest::Approx(0.3).epsilon(0.17));  // within 0.05 absolute
    CHECK(std::abs(est.alpha_hat - 0.3) <= 0.05);

    // linear field: alpha_hat ~ 1
    SpaceTimeField fl = make_field(g, 1.0, 512, [](double x, double) { return x; });
    AlphaEstimate est2 = estimate_alpha(fl, Q, 0.0);
    CHECK(std::abs(est2.alpha_hat - 1.0) <= 0.05);

    // constant field: degenerate, flagged rather than thrown
    SpaceTimeField fc = make_field(g, 1.0, 32, [](double, double) { return 7.0; });
    AlphaEstimate est3 = estimate_alpha(fc, Q, 0.0);
    CHECK(est3.degenerate);

    // too few admissible levels is a hard error
    Cylinder tiny = origin_cylinder(0.02, 0.5);
    CHECK_THROWS_AS(estimate_alpha(f3, tiny, 0.0), numerical_error);
}
