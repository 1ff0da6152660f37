#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "trunckern/evolve.hpp"

namespace trunckern {

/// Parabolic cylinder Q_R(center) = B_R(x0) x (t0 - R^{2s}, t0].
struct Cylinder {
    std::vector<double> center;  // x0
    double t0 = 0.0;             // <= 0
    double R = 1.0;
    double s = 0.5;

    double time_lo() const;  // t0 - R^{2s}
};

/// d((x,t),(y,tau)) = max{|x - y|, |t - tau|^{1/(2s)}}. Points are (x..., t).
double parabolic_distance(std::span<const double> p, std::span<const double> q, double s);

struct RegularityReport {
    double alpha = 0.0;
    double seminorm = 0.0;
    double cutoff = 0.0;  // pairs with d <= cutoff excluded
    std::size_t pairs_evaluated = 0;
    std::vector<double> argmax_p;  // (x..., t)
    std::vector<double> argmax_q;
    bool degenerate = false;   // no admissible pairs
    bool subsampled = false;   // pair budget exceeded; seeded stratified sample
    std::uint64_t seed = 0;
};

/// sup over pairs in Q at parabolic distance > rho of |u(p)-u(q)| / d(p,q)^alpha.
/// Exhaustive up to 1e7 pairs, then stratified seeded subsampling.
RegularityReport partial_holder_seminorm(const SpaceTimeField& field, const Cylinder& Q,
                                         double rho, double alpha, std::uint64_t seed = 0);

struct HarnackReport {
    double inf_value = 0.0;      // inf over Q_{R/2}
    double weighted_mass = 0.0;  // ∫_{I_R \ I_{R/2}} ∫ u / (R+|x|)^{d+2s}
    double forcing_bound = 0.0;  // a
    double empirical_c = 0.0;    // (inf + a) / mass, 0 when mass vanishes
    double plain_average = 0.0;  // mean of u over B_R x (I_R \ I_{R/2})
    double empirical_c_plain = 0.0;
    bool degenerate = false;
};

/// Empirical weak Harnack constant for a cylinder anchored at the origin.
/// Requires the field (including its exterior constant) to be nonnegative;
/// negativity violates the theorem hypothesis and is a hard error.
HarnackReport weak_harnack_ratio(const SpaceTimeField& field, const Cylinder& Q, double a);

struct OscillationDecay {
    std::vector<double> osc;  // osc over Q_{4^{-k} R}, k = 0 .. levels
    bool truncated = false;   // requested levels exceeded the resolution
};

/// Oscillation of the field over the shrinking cylinders Q_{4^{-k} R}
/// centered at the origin.
OscillationDecay oscillation_decay(const SpaceTimeField& field, double R, int levels, double s);

struct AlphaEstimate {
    double alpha_hat = 0.0;
    double residual_rms = 0.0;
    std::vector<double> osc;
    int levels_used = 0;
    bool degenerate = false;  // all oscillations vanish (constant field)
};

/// Least-squares decay exponent of log osc_k against k log 4, over the levels
/// admissible above max(rho, 2h). Needs at least 3 usable levels.
AlphaEstimate estimate_alpha(const SpaceTimeField& field, const Cylinder& Q, double rho);

}  // namespace trunckern
