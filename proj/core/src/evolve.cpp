#include "trunckern/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "trunckern/errors.hpp"
#include "trunckern/parallel.hpp"

namespace trunckern {

void EvolutionConfig::validate() const {
    grid.validate();
    op.validate(grid.d);
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw config_error("EvolutionConfig: horizon must be positive and finite");
    if (dt_policy.kind == DtPolicy::Kind::Auto) {
        if (!(dt_policy.cfl_fraction > 0.0 && dt_policy.cfl_fraction <= 1.0))
            throw config_error("EvolutionConfig: cfl_fraction must lie in (0, 1]");
    } else if (!(dt_policy.dt > 0.0)) {
        throw config_error("EvolutionConfig: fixed dt must be positive");
    }
    if (snapshot_stride < 1) throw config_error("EvolutionConfig: snapshot_stride must be >= 1");
    if (!grid.same_lattice(initial.spec) || initial.values.size() != grid.node_count())
        throw config_error("EvolutionConfig: initial data does not live on the grid");
    if (!std::isfinite(forcing.sup_bound) || forcing.sup_bound < 0.0)
        throw config_error("EvolutionConfig: forcing bound must be finite and nonnegative");
}

namespace {

/// The explicit step is provably order-preserving when no signed gradient
/// compensator enters the stencil: symmetric kernels at any s, anything below
/// s = 1/2, and the pair-concentrated extremal construction.
bool monotone_certified(const OperatorConfig& cfg) {
    switch (cfg.kind) {
        case OperatorKind::Linear:
            return cfg.kernel.is_symmetric || cfg.params.s < 0.5;
        case OperatorKind::PucciMinus:
        case OperatorKind::PucciPlus:
            return true;
        case OperatorKind::Isaac:
            for (const auto& group : cfg.isaac_family)
                for (const auto& m : group)
                    if (!m.kernel.is_symmetric && cfg.params.s >= 0.5) return false;
            return true;
    }
    return false;
}

GridFunction step_with(const NonlocalOperator& op, const GridFunction& u, double t,
                       const Forcing& forcing, double dt) {
    GridFunction fu = op.apply(u, GradientMode::Upwind);
    const GridSpec& g = u.spec;
    GridFunction next = u;
    if (forcing.is_zero()) {
        for (std::size_t i = 0; i < next.values.size(); ++i) next.values[i] += dt * fu.values[i];
    } else {
        std::vector<double> x(static_cast<std::size_t>(g.d));
        for (std::size_t i = 0; i < next.values.size(); ++i) {
            g.node_point(i, x);
            next.values[i] += dt * (fu.values[i] + forcing(x, t));
        }
    }
    return next;
}

void check_step_finite(const GridFunction& u, std::size_t step) {
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        if (!std::isfinite(u.values[i])) {
            std::ostringstream msg;
            msg << "explicit step " << step << ": non-finite value at node " << i;
            throw numerical_error(msg.str());
        }
    }
}

}  // namespace

double cfl_dt(const EvolutionConfig& cfg) {
    NonlocalOperator op(cfg.grid, cfg.op);
    const double mass = op.node_mass();
    if (!std::isfinite(mass)) throw numerical_error("cfl_dt: non-finite node mass");
    const double theta =
        (cfg.dt_policy.kind == DtPolicy::Kind::Auto) ? cfg.dt_policy.cfl_fraction : 1.0;
    if (mass <= 0.0) return cfg.horizon;  // zero operator: any step is stable
    return theta / mass;
}

GridFunction step_explicit(const GridFunction& u, double t, const EvolutionConfig& cfg,
                           double dt) {
    cfg.validate();
    NonlocalOperator op(cfg.grid, cfg.op);
    if (dt * op.node_mass() > 1.0 + 1e-9)
        throw config_error("step_explicit: dt exceeds the monotone CFL bound");
    GridFunction next = step_with(op, u, t, cfg.forcing, dt);
    check_step_finite(next, 0);
    return next;
}

SpaceTimeField solve_cauchy(const EvolutionConfig& cfg) {
    cfg.validate();
    NonlocalOperator op(cfg.grid, cfg.op);
    const double mass = op.node_mass();

    double dt_cap;
    if (cfg.dt_policy.kind == DtPolicy::Kind::Auto) {
        dt_cap = (mass > 0.0) ? cfg.dt_policy.cfl_fraction / mass : cfg.horizon;
    } else {
        dt_cap = cfg.dt_policy.dt;
        if (dt_cap * mass > 1.0 + 1e-9)
            throw config_error("solve_cauchy: fixed dt exceeds the monotone CFL bound");
    }
    const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(cfg.horizon / dt_cap - 1e-12)));
    const double dt = cfg.horizon / static_cast<double>(steps);

    SpaceTimeField field;
    field.grid = cfg.grid;
    field.dt = dt;

    GridFunction u = cfg.initial;
    u.spec = cfg.grid;  // the evolution's extension policy governs
    u.check_finite("initial data");

    // Global (box plus exterior constant) bounds; monotone steps never enlarge them.
    const bool check_max_principle = cfg.forcing.is_zero() && monotone_certified(cfg.op);
    const bool has_far = !cfg.grid.periodic();
    const double far_c = has_far ? cfg.grid.far_constant() : 0.0;
    auto global_sup = [&](const GridFunction& v) { return has_far ? std::max(v.max(), far_c) : v.max(); };
    auto global_inf = [&](const GridFunction& v) { return has_far ? std::min(v.min(), far_c) : v.min(); };
    double sup = global_sup(u), inf = global_inf(u);

    auto record = [&](std::size_t step_idx, const GridFunction& v) {
        const double t = (step_idx == steps) ? 0.0 : -cfg.horizon + static_cast<double>(step_idx) * dt;
        field.times.push_back(t);
        field.snapshots.push_back(v.values);
    };
    record(0, u);

    for (std::size_t k = 1; k <= steps; ++k) {
        const double t = -cfg.horizon + static_cast<double>(k - 1) * dt;
        u = step_with(op, u, t, cfg.forcing, dt);
        check_step_finite(u, k);
        if (check_max_principle) {
            const double tol = 1e-12 * (1.0 + std::max(std::abs(sup), std::abs(inf)));
            const double new_sup = global_sup(u), new_inf = global_inf(u);
            if (new_sup > sup + tol || new_inf < inf - tol) {
                std::ostringstream msg;
                msg << "maximum principle violated at step " << k << " (sup " << sup << " -> "
                    << new_sup << ", inf " << inf << " -> " << new_inf << ")";
                throw numerical_error(msg.str());
            }
            sup = new_sup;
            inf = new_inf;
        }
        if (k % static_cast<std::size_t>(cfg.snapshot_stride) == 0 || k == steps) record(k, u);
    }
    return field;
}

ConvergenceReport solve_truncation_sequence(const EvolutionConfig& cfg,
                                            std::span<const double> rho_list) {
    cfg.validate();
    if (rho_list.empty()) throw config_error("solve_truncation_sequence: empty rho list");
    for (std::size_t i = 0; i < rho_list.size(); ++i) {
        if (!(rho_list[i] >= 0.0)) throw config_error("solve_truncation_sequence: rho must be >= 0");
        if (i > 0 && !(rho_list[i] < rho_list[i - 1]))
            throw config_error("solve_truncation_sequence: rho list must be strictly decreasing");
    }
    if (cfg.op.kind == OperatorKind::Linear && !cfg.op.kernel.builtin)
        throw config_error("solve_truncation_sequence: requires the built-in kernel family");
    if (cfg.op.kind == OperatorKind::Isaac) {
        for (const auto& group : cfg.op.isaac_family)
            for (const auto& m : group)
                if (!m.kernel.builtin)
                    throw config_error("solve_truncation_sequence: requires built-in Isaac members");
    }

    auto with_rho = [&](double rho) {
        EvolutionConfig c = cfg;
        c.op.params.rho = rho;
        if (c.op.kind == OperatorKind::Linear) {
            c.op.kernel = make_truncated_fractional_kernel(c.op.params, cfg.op.kernel.scale);
        } else if (c.op.kind == OperatorKind::Isaac) {
            for (std::size_t gi = 0; gi < c.op.isaac_family.size(); ++gi)
                for (std::size_t mi = 0; mi < c.op.isaac_family[gi].size(); ++mi) {
                    KernelParams mp = cfg.op.isaac_family[gi][mi].kernel.params;
                    mp.rho = rho;
                    c.op.isaac_family[gi][mi].kernel =
                        make_truncated_fractional_kernel(mp, cfg.op.isaac_family[gi][mi].kernel.scale);
                }
        }
        return c;
    };

    // dt from the most restrictive (smallest rho) entry, shared by all runs.
    const double theta =
        (cfg.dt_policy.kind == DtPolicy::Kind::Auto) ? cfg.dt_policy.cfl_fraction : 1.0;
    double worst_mass = 0.0;
    for (double rho : rho_list) {
        EvolutionConfig c = with_rho(rho);
        worst_mass = std::max(worst_mass, NonlocalOperator(c.grid, c.op).node_mass());
    }
    double dt_cap = (worst_mass > 0.0) ? theta / worst_mass : cfg.horizon;
    if (cfg.dt_policy.kind == DtPolicy::Kind::Fixed) dt_cap = std::min(dt_cap, cfg.dt_policy.dt);

    const bool has_zero = rho_list.back() == 0.0;
    const double ref_rho = rho_list.back();

    EvolutionConfig ref_cfg = with_rho(ref_rho);
    ref_cfg.dt_policy = DtPolicy::fixed(dt_cap);
    SpaceTimeField ref = solve_cauchy(ref_cfg);

    ConvergenceReport report;
    report.reference = has_zero ? "rho=0" : ("finest rho=" + std::to_string(ref_rho));
    for (double rho : rho_list) {
        report.rho_sequence.push_back(rho);
        if (rho == ref_rho) {
            report.sup_errors.push_back(0.0);
            continue;
        }
        EvolutionConfig c = with_rho(rho);
        c.dt_policy = DtPolicy::fixed(dt_cap);
        SpaceTimeField run = solve_cauchy(c);
        if (run.times.size() != ref.times.size())
            throw numerical_error("solve_truncation_sequence: snapshot mismatch between runs");
        double err = 0.0;
        for (std::size_t ti = 0; ti < run.snapshots.size(); ++ti)
            for (std::size_t i = 0; i < run.snapshots[ti].size(); ++i)
                err = std::max(err, std::abs(run.snapshots[ti][i] - ref.snapshots[ti][i]));
        report.sup_errors.push_back(err);
    }
    return report;
}

GridFunction solve_elliptic(const GridSpec& grid, const OperatorConfig& op,
                            const GridFunction& f, const GridFunction& exterior) {
    GridSpec g = grid;
    auto ext = std::make_shared<GridFunction>(exterior);
    double beyond = 0.0;
    if (exterior.spec.extension.kind == Extension::Kind::Constant)
        beyond = exterior.spec.extension.value;
    g.extension = Extension::given(ext, beyond);
    g.validate();
    op.validate(g.d);
    if (!grid.same_lattice(f.spec)) throw config_error("solve_elliptic: forcing grid mismatch");

    const bool linear_pointwise = op.kind == OperatorKind::Linear && op.params.truncated() &&
                                  op.kernel.is_symmetric && op.kernel.is_integrable;
    if (op.kind == OperatorKind::Linear && !linear_pointwise && !op.params.truncated())
        throw config_error(
            "solve_elliptic: the pointwise linear path needs rho > 0 with a symmetric "
            "integrable kernel");

    NonlocalOperator engine(g, op);
    const double mass = engine.node_mass();
    const double tau = (mass > 0.0) ? 0.9 / mass : 1.0;
    const double tol = linear_pointwise ? 1e-8 : 1e-6;
    const std::size_t max_steps = linear_pointwise ? 400000 : 1000000;
    const std::size_t check_every = linear_pointwise ? 1 : 50;

    GridFunction u(g, 0.0);
    double residual = std::numeric_limits<double>::infinity();
    for (std::size_t it = 0; it < max_steps; ++it) {
        GridFunction fu = engine.apply(u, GradientMode::Upwind);
        bool check = (it % check_every == 0);
        if (check) residual = 0.0;
        for (std::size_t i = 0; i < u.values.size(); ++i) {
            const double r = fu.values[i] - f.values[i];
            if (check) residual = std::max(residual, std::abs(r));
            u.values[i] += tau * r;
        }
        if (check && residual < tol) return u;
    }
    std::ostringstream msg;
    msg << "solve_elliptic: no convergence after " << max_steps << " iterations; final residual "
        << residual;
    throw numerical_error(msg.str());
}

}  // namespace trunckern
