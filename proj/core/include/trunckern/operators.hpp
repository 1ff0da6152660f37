#pragma once

#include <span>
#include <vector>

#include "trunckern/grid.hpp"
#include "trunckern/kernel.hpp"

namespace trunckern {

enum class OperatorKind { Linear, PucciMinus, PucciPlus, Isaac };
enum class NearFieldMode { SecondDifference, Drop };

/// Gradient discretization: centered differences for plain operator
/// evaluation, first-order upwinding inside explicit time steps (keeps the
/// stencil monotone).
enum class GradientMode { Centered, Upwind };

struct IsaacMember {
    KernelFn kernel;
    std::vector<double> drift;  // empty = no drift
};

struct OperatorConfig {
    KernelParams params;
    OperatorKind kind = OperatorKind::Linear;
    KernelFn kernel;  // Linear
    /// inf over the outer index, sup over the inner one.
    std::vector<std::vector<IsaacMember>> isaac_family;
    std::vector<double> drift;  // Linear only; empty = none
    NearFieldMode near_field = NearFieldMode::SecondDifference;

    /// Throws config_error on structural problems; enforces that a drift is
    /// present only when s >= 1/2 and bounded by Lambda.
    void validate(int grid_d) const;
};

struct OperatorDiagnostics {
    double dropped_tail_bound = 0.0;  // user kernels: bound on the omitted far tail
};

/// The increment u(x+y) - u(x) with the s-dependent gradient compensator:
/// none below s = 1/2, restricted to the unit ball at s = 1/2, global above.
/// u is read through the extension policy when x + y leaves the box.
double apply_difference(const GridFunction& u, std::span<const int> node,
                        std::span<const double> y, std::span<const double> gradient_at_x,
                        double s);

/// Grid discretization of one operator: lattice far-field sum, second
/// difference model of the near field, closed-form constant tail, and the
/// dyadic bang-bang construction for the extremal kinds. Precomputes the
/// offset table and kernel weights once; apply() is then read-only and safe
/// to call concurrently.
class NonlocalOperator {
public:
    NonlocalOperator(const GridSpec& grid, const OperatorConfig& cfg);

    const OperatorConfig& config() const { return cfg_; }
    const GridSpec& grid() const { return grid_; }

    GridFunction apply(const GridFunction& u, GradientMode mode = GradientMode::Centered,
                       OperatorDiagnostics* diag = nullptr) const;

    /// Sup over nodes of the negated diagonal stencil weight; the explicit
    /// step is monotone for dt <= 1/node_mass().
    double node_mass() const { return node_mass_; }

    /// True when 0 < rho < h: the truncation is invisible to the far-field
    /// lattice sum and enters only through the near-field moments.
    bool rho_below_h() const { return rho_below_h_; }

private:
    struct Member {  // one linear operator (kernel weights + drift)
        std::vector<double> w;          // K(jh) h^d per offset
        std::vector<double> near_m;     // per-axis second moments over B_h
        double tail_mass = 0.0;
        bool tail_exact = false;        // closed form available (built-in family)
        bool symmetric = false;
        std::vector<double> drift;
        double mass = 0.0;
    };

    void build_member(Member& m, const KernelFn& k, std::span<const double> drift) const;
    void apply_member_range(const Member& m, const GridFunction& u, GradientMode mode,
                            std::vector<double>& out, std::size_t b, std::size_t e) const;
    void apply_pucci_range(int sign, const GridFunction& u, std::vector<double>& out,
                           std::size_t b, std::size_t e) const;

    GridSpec grid_;
    OperatorConfig cfg_;
    bool rho_below_h_ = false;
    double node_mass_ = 0.0;

    // offset table (flattened multi-indices plus radii and dyadic ring ids)
    int d_ = 1;
    double h_ = 0.0;
    double far_radius_ = 0.0;
    std::size_t count_ = 0;
    std::vector<int> j_;                // count * d
    std::vector<double> r_;             // |j h|
    std::vector<int> ring_;             // floor(log2(r/h))
    std::vector<std::size_t> half_;     // canonical half (j lexicographically positive)
    std::vector<std::size_t> mirror_;   // index of -j
    int nrings_ = 0;
    std::vector<int> ring_donor_;       // nearest nonempty ring per ring

    Member linear_;                       // Linear / Pucci base (lower envelope)
    std::vector<std::vector<Member>> isaac_;
    std::vector<double> slack_;           // Pucci per-ring mass budget
};

/// L_K u plus optional drift (Eq.-level linear operator). Thin wrapper over
/// NonlocalOperator for one-shot use.
GridFunction apply_linear(const GridFunction& u, const OperatorConfig& cfg,
                          OperatorDiagnostics* diag = nullptr);

/// Extremal operators via the dyadic bang-bang construction.
GridFunction apply_pucci(const GridFunction& u, const OperatorConfig& cfg);

/// inf_alpha sup_beta of the member operators.
GridFunction apply_isaac(const GridFunction& u, const OperatorConfig& cfg);

/// Lambda * |grad u| with extension-aware differences.
GridFunction drift_envelope(const GridFunction& u, double Lambda,
                            GradientMode mode = GradientMode::Centered);

/// Per-axis second moments of K over B_h. Closed form for the built-in
/// family; dyadic-shell quadrature otherwise.
std::vector<double> near_field_moments(const KernelFn& k, double h);
/// Always takes the quadrature path (oracle for the closed form).
std::vector<double> near_field_moments_quadrature(const KernelFn& k, double h);

}  // namespace trunckern
