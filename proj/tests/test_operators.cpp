#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "trunckern/errors.hpp"
#include "trunckern/operators.hpp"
#include "trunckern/oracles.hpp"

using namespace trunckern;

namespace {

GridSpec grid1d(int n, double L, Extension ext = Extension::constant(0.0)) {
    GridSpec g;
    g.d = 1;
    g.L = L;
    g.n = n;
    g.extension = ext;
    return g;
}

KernelParams params(double s, double rho, double Lambda = 4.0) {
    return KernelParams{1, s, 1.0, Lambda, rho};
}

OperatorConfig linear_cfg(const KernelParams& p, double scale = 1.0) {
    OperatorConfig cfg;
    cfg.params = p;
    cfg.kind = OperatorKind::Linear;
    cfg.kernel = make_truncated_fractional_kernel(p, scale);
    return cfg;
}

OperatorConfig pucci_cfg(const KernelParams& p, bool plus) {
    OperatorConfig cfg;
    cfg.params = p;
    cfg.kind = plus ? OperatorKind::PucciPlus : OperatorKind::PucciMinus;
    return cfg;
}

GridFunction random_field(const GridSpec& g, std::mt19937_64& rng, double lo = -1.0,
                          double hi = 1.0) {
    GridFunction u(g);
    std::uniform_real_distribution<double> dist(lo, hi);
    for (double& v : u.values) v = dist(rng);
    return u;
}

/// One-sided lattice weights of the lower envelope, mirroring the engine's
/// quadrature conventions: moment-matched cells for the first 8 offsets,
/// plain midpoint beyond.
std::vector<double> envelope_weights(const KernelParams& p, double h, int m) {
    std::vector<double> w((std::size_t)m + 1, 0.0);
    for (int j = 1; j <= m; ++j) {
        if (j <= 8) {
            const double second =
                builtin_radial_moment(p, p.lambda, 2.0, (j - 0.5) * h, (j + 0.5) * h);
            w[(std::size_t)j] = 0.5 * second / (j * h * j * h);
        } else {
            w[(std::size_t)j] = lower_envelope(p, j * h) * h;
        }
    }
    return w;
}

/// Hand-rolled lattice application of a symmetric kernel given by per-offset
/// pair weights w_j (j = 1..m), with the lower-envelope near field and tail.
/// Used as the independent side of the sandwich checks.
double lattice_apply_at(const GridFunction& u, const KernelParams& p,
                        const std::vector<double>& w, int i) {
    const GridSpec& g = u.spec;
    const double h = g.h();
    auto at = [&](int t) { return (t >= 0 && t < g.n) ? u.values[(std::size_t)t] : 0.0; };
    double acc = 0.0;
    for (int j = 1; j <= (int)w.size() - 1; ++j)
        acc += (at(i + j) + at(i - j) - 2.0 * u.values[(std::size_t)i]) * w[(std::size_t)j];
    const double nm = builtin_radial_moment(p, p.lambda, 2.0, 0.0, 0.5 * h);
    acc += 0.5 * nm * (at(i + 1) + at(i - 1) - 2.0 * u.values[(std::size_t)i]) / (h * h);
    acc += (0.0 - u.values[(std::size_t)i]) * builtin_tail_mass(p, p.lambda, g.far_reach());
    return acc;
}

}  // namespace

TEST_CASE("apply_difference compensator cases") {
    GridSpec g = grid1d(65, 4.0);  // h = 1/8, node 32 sits at x = 0
    const int node[1] = {32};

    GridFunction c(g, 5.0);
    c.spec.extension = Extension::constant(5.0);
    const double y[1] = {0.25};  // lattice-aligned offset: evaluation is exact
    const double grad0[1] = {0.0};
    for (double s : {0.25, 0.5, 0.75})
        CHECK(apply_difference(c, node, y, grad0, s) == 0.0);

    // full compensator annihilates linear functions for s > 1/2
    GridFunction lin = sample_profile(g, [](std::span<const double> x) { return 2.0 * x[0]; });
    const double grad2[1] = {2.0};
    CHECK(apply_difference(lin, node, y, grad2, 0.75) == doctest::Approx(0.0));

    // no compensator below s = 1/2
    GridFunction lin1 = sample_profile(g, [](std::span<const double> x) { return x[0]; });
    const double grad1[1] = {1.0};
    CHECK(apply_difference(lin1, node, y, grad1, 0.25) == doctest::Approx(0.25));

    // s = 1/2, u = x^2 at x = 0, y = 0.5 inside B_1: 0.25 - 0 - 0.5 * 0
    GridFunction sq = sample_profile(g, [](std::span<const double> x) { return x[0] * x[0]; });
    const double yhalf[1] = {0.5};
    CHECK(apply_difference(sq, node, yhalf, grad0, 0.5) == doctest::Approx(0.25));
}

TEST_CASE("constant annihilation is bitwise for every operator kind") {
    GridSpec g = grid1d(64, 2.0, Extension::constant(3.5));
    GridFunction u(g, 3.5);
    KernelParams p = params(0.5, 0.25);

    GridFunction lin = apply_linear(u, linear_cfg(p));
    GridFunction mp = apply_pucci(u, pucci_cfg(p, true));
    GridFunction mm = apply_pucci(u, pucci_cfg(p, false));

    OperatorConfig icfg;
    icfg.params = p;
    icfg.kind = OperatorKind::Isaac;
    icfg.isaac_family = {{IsaacMember{make_truncated_fractional_kernel(p, 1.0), {0.5}}},
                         {IsaacMember{make_truncated_fractional_kernel(p, 1.5), {}}}};
    GridFunction is = apply_isaac(u, icfg);

    for (std::size_t i = 0; i < u.values.size(); ++i) {
        CHECK(lin.values[i] == 0.0);
        CHECK(mp.values[i] == 0.0);
        CHECK(mm.values[i] == 0.0);
        CHECK(is.values[i] == 0.0);
    }
}

TEST_CASE("translation equivariance on periodic grids is exact") {
    GridSpec g = grid1d(64, 1.0, Extension::periodic());
    std::mt19937_64 rng(7);
    GridFunction u = random_field(g, rng);
    const int shift = 17;
    GridFunction us(g);
    for (int i = 0; i < g.n; ++i) us.values[(std::size_t)((i + shift) % g.n)] = u.values[(std::size_t)i];

    for (double s : {0.25, 0.75}) {
        KernelParams p = params(s, 0.125);
        for (bool plus : {false, true}) {
            GridFunction a = apply_pucci(u, pucci_cfg(p, plus));
            GridFunction b = apply_pucci(us, pucci_cfg(p, plus));
            for (int i = 0; i < g.n; ++i)
                CHECK(b.values[(std::size_t)((i + shift) % g.n)] == a.values[(std::size_t)i]);
        }
        GridFunction a = apply_linear(u, linear_cfg(p));
        GridFunction b = apply_linear(us, linear_cfg(p));
        for (int i = 0; i < g.n; ++i)
            CHECK(b.values[(std::size_t)((i + shift) % g.n)] == a.values[(std::size_t)i]);
    }
}

TEST_CASE("extremal operators: sign antisymmetry is bitwise") {
    GridSpec g = grid1d(96, 2.0);
    std::mt19937_64 rng(11);
    for (double s : {0.25, 0.5, 0.75}) {
        KernelParams p = params(s, 0.0);
        GridFunction u = random_field(g, rng);
        GridFunction nu = u;
        for (double& v : nu.values) v = -v;
        GridFunction plus_of_neg = apply_pucci(nu, pucci_cfg(p, true));
        GridFunction minus_of_pos = apply_pucci(u, pucci_cfg(p, false));
        for (std::size_t i = 0; i < u.values.size(); ++i)
            CHECK(plus_of_neg.values[i] == -minus_of_pos.values[i]);
    }
}

TEST_CASE("extremal operators: homogeneity and constant shifts") {
    GridSpec g = grid1d(72, 2.0);
    std::mt19937_64 rng(3);
    KernelParams p = params(0.5, 0.125);
    GridFunction u = random_field(g, rng);

    GridFunction mp = apply_pucci(u, pucci_cfg(p, true));

    GridFunction u2 = u;
    for (double& v : u2.values) v *= 2.5;
    GridFunction mp2 = apply_pucci(u2, pucci_cfg(p, true));
    for (std::size_t i = 0; i < u.values.size(); ++i)
        CHECK(mp2.values[i] == doctest::Approx(2.5 * mp.values[i]).epsilon(1e-13));

    // adding a constant (also to the exterior) changes nothing
    GridSpec gsh = g;
    gsh.extension = Extension::constant(1.0);
    GridFunction ush(gsh);
    for (std::size_t i = 0; i < u.values.size(); ++i) ush.values[i] = u.values[i] + 1.0;
    GridFunction mpsh = apply_pucci(ush, pucci_cfg(p, true));
    for (std::size_t i = 0; i < u.values.size(); ++i)
        CHECK(mpsh.values[i] == doctest::Approx(mp.values[i]).epsilon(1e-12));
}

TEST_CASE("sandwich: capped symmetric lattice kernels sit between the extremals") {
    GridSpec g = grid1d(64, 1.0);
    const double h = g.h();
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    for (double s : {0.25, 0.5, 0.75}) {
        KernelParams p = params(s, 0.0);
        GridFunction u = random_field(g, rng);
        GridFunction mm = apply_pucci(u, pucci_cfg(p, false));
        GridFunction mp = apply_pucci(u, pucci_cfg(p, true));

        const int m = (int)std::lround(g.far_reach() / h);
        for (int trial = 0; trial < 40; ++trial) {
            // lower envelope plus ring-capped extra mass on one random
            // symmetric pair per dyadic ring
            std::vector<double> w = envelope_weights(p, h, m);
            for (int ring = 0; (1 << ring) <= m; ++ring) {
                const int lo = 1 << ring;
                const int hi = std::min(m, (1 << (ring + 1)) - 1);
                double ring_mass = 0.0;
                for (int j = lo; j <= hi; ++j) ring_mass += 2.0 * w[(std::size_t)j];
                const double cap = p.Lambda * std::pow(lo * h, -2.0 * p.s);
                const double slack = std::max(0.0, cap - ring_mass);
                const int pick = std::min(hi, lo + (int)(unif(rng) * (hi - lo + 1)));
                w[(std::size_t)pick] += 0.5 * unif(rng) * slack;
            }
            for (int i = 0; i < g.n; ++i) {
                const double lw = lattice_apply_at(u, p, w, i);
                CHECK(lw >= mm.values[(std::size_t)i] - 1e-10);
                CHECK(lw <= mp.values[(std::size_t)i] + 1e-10);
            }
        }
    }
}

TEST_CASE("extremal sub/superadditivity") {
    GridSpec g = grid1d(64, 1.5);
    std::mt19937_64 rng(23);
    KernelParams p = params(0.4, 0.0);
    GridFunction u = random_field(g, rng);
    GridFunction v = random_field(g, rng);
    GridFunction uv = u;
    for (std::size_t i = 0; i < uv.values.size(); ++i) uv.values[i] += v.values[i];

    GridFunction pu = apply_pucci(u, pucci_cfg(p, true));
    GridFunction pv = apply_pucci(v, pucci_cfg(p, true));
    GridFunction puv = apply_pucci(uv, pucci_cfg(p, true));
    GridFunction mu = apply_pucci(u, pucci_cfg(p, false));
    GridFunction mv = apply_pucci(v, pucci_cfg(p, false));
    GridFunction muv = apply_pucci(uv, pucci_cfg(p, false));

    for (std::size_t i = 0; i < u.values.size(); ++i) {
        CHECK(puv.values[i] <= pu.values[i] + pv.values[i] + 1e-10);
        CHECK(muv.values[i] >= mu.values[i] + mv.values[i] - 1e-10);
    }
}

TEST_CASE("minimum node: M^- reduces to the lower-envelope operator") {
    // At a global discrete minimum all increments are nonnegative, every
    // slack budget is unused, and M^- equals the base sum. Randomly sampled
    // admissible kernels can only land above it.
    GridSpec g = grid1d(65, 1.0);  // node 32 at x = 0
    GridFunction u = sample_profile(g, [](std::span<const double> x) { return x[0] * x[0]; });
    KernelParams p = params(0.25, 0.0);
    GridFunction mm = apply_pucci(u, pucci_cfg(p, false));
    GridFunction base = apply_linear(u, linear_cfg(p, p.lambda));
    const int mid = 32;
    CHECK(mm.values[(std::size_t)mid] ==
          doctest::Approx(base.values[(std::size_t)mid]).epsilon(1e-12));

    const double h = g.h();
    const int m = (int)std::lround(g.far_reach() / h);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double best = 1e300;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> w = envelope_weights(p, h, m);
        for (int ring = 0; (1 << ring) <= m; ++ring) {
            const int lo = 1 << ring;
            const int hi = std::min(m, (1 << (ring + 1)) - 1);
            double ring_mass = 0.0;
            for (int j = lo; j <= hi; ++j) ring_mass += 2.0 * w[(std::size_t)j];
            const double cap = p.Lambda * std::pow(lo * h, -2.0 * p.s);
            const double slack = std::max(0.0, cap - ring_mass);
            // spread a random share of the budget across the ring
            for (int j = lo; j <= hi; ++j)
                w[(std::size_t)j] += 0.5 * unif(rng) * slack / (hi - lo + 1);
        }
        best = std::min(best, lattice_apply_at(u, p, w, mid));
    }
    CHECK(best >= mm.values[(std::size_t)mid] - 1e-10);
}

TEST_CASE("near-field moments: quadrature matches the closed form") {
    for (double s : {0.25, 0.5, 0.75}) {
        for (double rho : {0.0, 0.01}) {
            KernelParams p = params(s, rho);
            auto k = make_truncated_fractional_kernel(p, 1.3);
            const double h = 1.0 / 128.0;
            auto closed = near_field_moments(k, h);
            auto quad = near_field_moments_quadrature(k, h);
            REQUIRE(closed.size() == 1);
            CHECK(quad[0] == doctest::Approx(closed[0]).epsilon(1e-8));
        }
    }
}

TEST_CASE("s = 1/2 compensator radius independence (symmetric kernels)") {
    // With the annulus cancellation property the compensator cutoff radius is
    // value-neutral; the symmetrized form is the radius-free limit.
    KernelParams p = params(0.5, 0.0);
    auto kernel = make_truncated_fractional_kernel(p, 1.0);
    auto u = [](std::span<const double> y) { return std::exp(-y[0] * y[0]); };
    const double x[1] = {0.4};
    const double grad[1] = {-2.0 * 0.4 * std::exp(-0.16)};
    const double sym = brute_force_operator(u, kernel, x);
    const double r1 = brute_force_operator(u, kernel, x, grad, 1.0, false);
    const double r3 = brute_force_operator(u, kernel, x, grad, 3.0, false);
    CHECK(r1 == doctest::Approx(sym).epsilon(1e-8));
    CHECK(r3 == doctest::Approx(r1).epsilon(1e-8));
}

TEST_CASE("isaac: singleton family equals the linear operator") {
    GridSpec g = grid1d(64, 1.0);
    std::mt19937_64 rng(29);
    KernelParams p = params(0.25, 0.125);
    GridFunction u = random_field(g, rng);

    OperatorConfig icfg;
    icfg.params = p;
    icfg.kind = OperatorKind::Isaac;
    icfg.isaac_family = {{IsaacMember{make_truncated_fractional_kernel(p, 1.0), {}}}};
    GridFunction is = apply_isaac(u, icfg);
    GridFunction lin = apply_linear(u, linear_cfg(p, 1.0));
    for (std::size_t i = 0; i < u.values.size(); ++i)
        CHECK(is.values[i] == doctest::Approx(lin.values[i]).epsilon(1e-14));
}

TEST_CASE("isaac: two kernels reduce to min / max of the linear applications") {
    GridSpec g = grid1d(64, 1.0);
    std::mt19937_64 rng(31);
    KernelParams p = params(0.25, 0.125);
    GridFunction u = random_field(g, rng);
    GridFunction l1 = apply_linear(u, linear_cfg(p, 1.0));
    GridFunction l2 = apply_linear(u, linear_cfg(p, 1.8));

    OperatorConfig inf_cfg;
    inf_cfg.params = p;
    inf_cfg.kind = OperatorKind::Isaac;
    inf_cfg.isaac_family = {{IsaacMember{make_truncated_fractional_kernel(p, 1.0), {}}},
                            {IsaacMember{make_truncated_fractional_kernel(p, 1.8), {}}}};
    GridFunction fmin = apply_isaac(u, inf_cfg);

    OperatorConfig sup_cfg = inf_cfg;
    sup_cfg.isaac_family = {{IsaacMember{make_truncated_fractional_kernel(p, 1.0), {}},
                             IsaacMember{make_truncated_fractional_kernel(p, 1.8), {}}}};
    GridFunction fmax = apply_isaac(u, sup_cfg);

    for (std::size_t i = 0; i < u.values.size(); ++i) {
        CHECK(fmin.values[i] ==
              doctest::Approx(std::min(l1.values[i], l2.values[i])).epsilon(1e-14));
        CHECK(fmax.values[i] ==
              doctest::Approx(std::max(l1.values[i], l2.values[i])).epsilon(1e-14));
    }
}

TEST_CASE("isaac envelope: sandwiched by the extremals plus the drift term") {
    GridSpec g = grid1d(64, 1.0);
    std::mt19937_64 rng(37);
    KernelParams p = params(0.5, 0.125);
    GridFunction u = random_field(g, rng);

    OperatorConfig icfg;
    icfg.params = p;
    icfg.kind = OperatorKind::Isaac;
    icfg.isaac_family = {
        {IsaacMember{make_truncated_fractional_kernel(p, 1.0), {0.7}},
         IsaacMember{make_truncated_fractional_kernel(p, 1.4), {-0.3}}},
        {IsaacMember{make_truncated_fractional_kernel(p, 1.2), {1.0}}}};
    GridFunction is = apply_isaac(u, icfg);
    GridFunction mp = apply_pucci(u, pucci_cfg(p, true));
    GridFunction mm = apply_pucci(u, pucci_cfg(p, false));
    GridFunction env = drift_envelope(u, p.Lambda);

    for (std::size_t i = 0; i < u.values.size(); ++i) {
        CHECK(is.values[i] <= mp.values[i] + env.values[i] + 1e-9);
        CHECK(is.values[i] >= mm.values[i] - env.values[i] - 1e-9);
    }

    OperatorConfig empty;
    empty.params = p;
    empty.kind = OperatorKind::Isaac;
    CHECK_THROWS_AS(apply_isaac(u, empty), config_error);
}

TEST_CASE("drift envelope values") {
    GridSpec g = grid1d(65, 2.0);
    GridFunction c(g, 4.0);
    c.spec.extension = Extension::constant(4.0);
    GridFunction e = drift_envelope(c, 2.0);
    for (double v : e.values) CHECK(v == 0.0);

    GridFunction lin = sample_profile(g, [](std::span<const double> x) { return 3.0 * x[0]; });
    GridFunction e2 = drift_envelope(lin, 2.0);
    for (int i = 1; i + 1 < g.n; ++i)
        CHECK(e2.values[(std::size_t)i] == doctest::Approx(6.0).epsilon(1e-12));

    // kink case: centered difference sees slope 0 at the tip of |x|, the
    // upwind variant sees the full slope
    GridFunction kink = sample_profile(g, [](std::span<const double> x) { return std::abs(x[0]); });
    GridFunction ec = drift_envelope(kink, 2.0, GradientMode::Centered);
    GridFunction eu = drift_envelope(kink, 2.0, GradientMode::Upwind);
    const std::size_t mid = (std::size_t)(g.n - 1) / 2;
    CHECK(ec.values[mid] == doctest::Approx(0.0));
    CHECK(eu.values[mid] == doctest::Approx(2.0));
}

TEST_CASE("drift restrictions") {
    GridSpec g = grid1d(32, 1.0);

    KernelParams p = params(0.25, 0.5);
    OperatorConfig cfg = linear_cfg(p);
    cfg.drift = {0.5};
    CHECK_THROWS_AS(NonlocalOperator(g, cfg), config_error);  // drift requires s >= 1/2

    KernelParams p2 = params(0.5, 0.5);
    OperatorConfig cfg2 = linear_cfg(p2);
    cfg2.drift = {p2.Lambda * 2.0};
    CHECK_THROWS_AS(NonlocalOperator(g, cfg2), config_error);  // exceeds Lambda
}

TEST_CASE("linear operator matches the adaptive-quadrature oracle") {
    BumpProfile eta{2.0};
    auto u_fn = [&eta](std::span<const double> y) { return std::cos(3.0 * y[0]) * eta.eta(y); };
    for (double s : {0.25, 0.5, 0.75}) {
        for (double rho : {0.0, 0.25}) {
            KernelParams p = params(s, rho);
            GridSpec g = grid1d(2048 + 1, 4.0);  // h = 2^-8
            GridFunction u = sample_profile(g, u_fn);
            NonlocalOperator op(g, linear_cfg(p));
            GridFunction lu = op.apply(u);
            auto kernel = make_truncated_fractional_kernel(p, 1.0);
            for (double x : {0.0, 0.4}) {
                const long i = std::lround((x + g.L) / g.h());
                const double pt[1] = {g.coord((int)i)};
                const double ref =
                    brute_force_operator(u_fn, kernel, std::span<const double>(pt, 1));
                const double err = std::abs(lu.values[(std::size_t)i] - ref);
                CHECK(err <= 1e-3 * std::max(1.0, std::abs(ref)));
            }
        }
    }
}

TEST_CASE("two dimensions: annihilation, equivariance and the oracle") {
    GridSpec g;
    g.d = 2;
    g.L = 1.0;
    g.n = 33;
    g.extension = Extension::constant(1.5);

    KernelParams p{2, 0.5, 1.0, 4.0, 0.25};
    OperatorConfig lin;
    lin.params = p;
    lin.kind = OperatorKind::Linear;
    lin.kernel = make_truncated_fractional_kernel(p, 1.0);
    OperatorConfig pm;
    pm.params = p;
    pm.kind = OperatorKind::PucciMinus;

    GridFunction c(g, 1.5);
    for (double v : apply_linear(c, lin).values) CHECK(v == 0.0);
    for (double v : apply_pucci(c, pm).values) CHECK(v == 0.0);

    // radially symmetric smooth profile vs the d = 2 adaptive-quadrature oracle
    GridSpec g2;
    g2.d = 2;
    g2.L = 2.0;
    g2.n = 129;
    g2.extension = Extension::constant(0.0);
    auto u_fn = [](std::span<const double> x) {
        return std::exp(-2.0 * (x[0] * x[0] + x[1] * x[1]));
    };
    GridFunction u = sample_profile(g2, u_fn);
    KernelParams p2{2, 0.5, 1.0, 4.0, 0.25};
    OperatorConfig lin2;
    lin2.params = p2;
    lin2.kind = OperatorKind::Linear;
    lin2.kernel = make_truncated_fractional_kernel(p2, 1.0);
    GridFunction lu = apply_linear(u, lin2);
    auto kernel = make_truncated_fractional_kernel(p2, 1.0);
    const double pt[2] = {0.0, 0.0};
    const double ref = brute_force_operator(u_fn, kernel, pt);
    const std::size_t center = g2.flatten(std::array<int, 2>{64, 64});
    CHECK(lu.values[center] == doctest::Approx(ref).epsilon(5e-3));
}
