#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "trunckern/grid.hpp"
#include "trunckern/operators.hpp"

namespace trunckern {

/// Bounded forcing f(x, t). A default-constructed Forcing is identically zero.
struct Forcing {
    std::function<double(std::span<const double>, double)> f;
    double sup_bound = 0.0;

    bool is_zero() const { return !f; }
    double operator()(std::span<const double> x, double t) const { return f ? f(x, t) : 0.0; }
};

struct DtPolicy {
    enum class Kind { Auto, Fixed };
    Kind kind = Kind::Auto;
    double cfl_fraction = 0.9;  // theta in (0, 1]
    double dt = 0.0;

    static DtPolicy auto_cfl(double theta = 0.9) { return {Kind::Auto, theta, 0.0}; }
    static DtPolicy fixed(double dt) { return {Kind::Fixed, 1.0, dt}; }
};

/// Data for the forward evolution of du/dt - F(u) = f. The solution lives on
/// times in [-T, 0] with the data imposed at t = -T (the paper's time axis,
/// integrated in the well-posed direction).
struct EvolutionConfig {
    GridSpec grid;
    OperatorConfig op;
    Forcing forcing;
    GridFunction initial;
    double horizon = 1.0;
    DtPolicy dt_policy;
    int snapshot_stride = 1;

    void validate() const;
};

/// Time-stamped snapshots on [-T, 0]; times strictly increasing, last one 0.
struct SpaceTimeField {
    GridSpec grid;
    double dt = 0.0;
    std::vector<double> times;
    std::vector<std::vector<double>> snapshots;
};

struct ConvergenceReport {
    std::vector<double> rho_sequence;
    std::vector<double> sup_errors;
    std::string reference;
};

/// Stable step size theta / (M_K + sum |b_k| / h): M_K is the full discrete
/// kernel mass seen by one node (lattice sum, near-field moment weight and
/// constant-tail mass, plus extremal slack budgets).
double cfl_dt(const EvolutionConfig& cfg);

/// One forward-Euler step u + dt (F(u) + f(., t)) with upwinded drift.
/// Enforces dt * node_mass <= 1 so the stencil stays monotone.
GridFunction step_explicit(const GridFunction& u, double t, const EvolutionConfig& cfg,
                           double dt);

SpaceTimeField solve_cauchy(const EvolutionConfig& cfg);

/// Reruns the Cauchy problem with the built-in kernel truncated at each rho in
/// the decreasing list, on a common grid and dt (taken from the most
/// restrictive entry), and reports sup-norm gaps against the rho = 0 run when
/// present (the finest rho otherwise).
ConvergenceReport solve_truncation_sequence(const EvolutionConfig& cfg,
                                            std::span<const double> rho_list);

/// Solves F(u) = f in the box with exterior data fixed: damped fixed-point
/// iteration for linear symmetric integrable kernels (residual < 1e-8),
/// pseudo-time marching to steady state otherwise (residual < 1e-6).
GridFunction solve_elliptic(const GridSpec& grid, const OperatorConfig& op,
                            const GridFunction& f, const GridFunction& exterior);

}  // namespace trunckern
