#include "trunckern/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "trunckern/errors.hpp"

namespace trunckern {

double Cylinder::time_lo() const { return t0 - std::pow(R, 2.0 * s); }

double parabolic_distance(std::span<const double> p, std::span<const double> q, double s) {
    const std::size_t d = p.size() - 1;
    double space2 = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
        const double dx = p[k] - q[k];
        space2 += dx * dx;
    }
    const double dt = std::abs(p[d] - q[d]);
    return std::max(std::sqrt(space2), std::pow(dt, 1.0 / (2.0 * s)));
}

namespace {

/// Flat list of space-time samples inside a cylinder.
struct SampleSet {
    int d = 1;
    std::vector<double> x;  // m * d
    std::vector<double> t;  // m
    std::vector<double> v;  // m
    std::size_t size() const { return t.size(); }
};

SampleSet collect(const SpaceTimeField& field, std::span<const double> center, double t0,
                  double R, double s) {
    const GridSpec& g = field.grid;
    SampleSet set;
    set.d = g.d;
    const double lo = t0 - std::pow(R, 2.0 * s);

    std::vector<std::size_t> nodes;
    std::vector<double> p(static_cast<std::size_t>(g.d));
    for (std::size_t f = 0; f < g.node_count(); ++f) {
        g.node_point(f, p);
        double r2 = 0.0;
        for (int k = 0; k < g.d; ++k) {
            const double dx = p[static_cast<std::size_t>(k)] - center[static_cast<std::size_t>(k)];
            r2 += dx * dx;
        }
        if (r2 <= R * R * (1.0 + 1e-12)) nodes.push_back(f);
    }
    for (std::size_t ti = 0; ti < field.times.size(); ++ti) {
        const double tt = field.times[ti];
        if (!(tt > lo && tt <= t0 + 1e-15)) continue;
        for (std::size_t f : nodes) {
            g.node_point(f, p);
            for (int k = 0; k < g.d; ++k) set.x.push_back(p[static_cast<std::size_t>(k)]);
            set.t.push_back(tt);
            set.v.push_back(field.snapshots[ti][f]);
        }
    }
    return set;
}

double pair_distance(const SampleSet& set, std::size_t i, std::size_t j, double s) {
    double space2 = 0.0;
    for (int k = 0; k < set.d; ++k) {
        const double dx = set.x[i * static_cast<std::size_t>(set.d) + static_cast<std::size_t>(k)] -
                          set.x[j * static_cast<std::size_t>(set.d) + static_cast<std::size_t>(k)];
        space2 += dx * dx;
    }
    const double dt = std::abs(set.t[i] - set.t[j]);
    return std::max(std::sqrt(space2), std::pow(dt, 1.0 / (2.0 * s)));
}

/// Time-cell weights: each snapshot owns the midpoint cell around its time,
/// clipped to the window (lo, hi]. Cells tile the field's time span, so for
/// windows inside the span the weights sum exactly to the window length.
std::vector<double> time_cell_weights(const SpaceTimeField& field, double lo, double hi) {
    const std::size_t m = field.times.size();
    std::vector<double> w(m, 0.0);
    if (m == 0) return w;
    for (std::size_t i = 0; i < m; ++i) {
        const double left = (i == 0) ? field.times[0] - 0.5 * field.dt
                                     : 0.5 * (field.times[i - 1] + field.times[i]);
        const double right = (i + 1 == m) ? field.times[m - 1] + 0.5 * field.dt
                                          : 0.5 * (field.times[i] + field.times[i + 1]);
        w[i] = std::max(0.0, std::min(right, hi) - std::max(left, lo));
    }
    return w;
}

/// ∫_{|x| > L} (R + |x|)^{-d-2s} dx, closed form for d <= 3.
double weight_tail(int d, double s, double R, double L) {
    const double s2 = 2.0 * s;
    const double a = R + L;
    switch (d) {
        case 1:
            return 2.0 * std::pow(a, -s2) / s2;
        case 2:
            return 2.0 * std::numbers::pi *
                   (std::pow(a, -s2) / s2 - R * std::pow(a, -1.0 - s2) / (1.0 + s2));
        case 3:
            return 4.0 * std::numbers::pi *
                   (std::pow(a, -s2) / s2 - 2.0 * R * std::pow(a, -1.0 - s2) / (1.0 + s2) +
                    R * R * std::pow(a, -2.0 - s2) / (2.0 + s2));
        default:
            throw config_error("weak_harnack_ratio: weighted tail implemented for d <= 3");
    }
}

}  // namespace

RegularityReport partial_holder_seminorm(const SpaceTimeField& field, const Cylinder& Q,
                                         double rho, double alpha, std::uint64_t seed) {
    if (!(alpha > 0.0) || !(alpha < 2.0 * Q.s))
        throw config_error("partial_holder_seminorm: alpha must lie in (0, 2s)");
    if (static_cast<int>(Q.center.size()) != field.grid.d)
        throw config_error("partial_holder_seminorm: cylinder dimension mismatch");

    RegularityReport rep;
    rep.alpha = alpha;
    rep.cutoff = rho;
    rep.seed = seed;

    SampleSet set = collect(field, Q.center, Q.t0, Q.R, Q.s);
    const std::size_t m = set.size();
    if (m < 2) {
        rep.degenerate = true;
        return rep;
    }

    const std::size_t budget = 10'000'000;
    const std::size_t total_pairs = m * (m - 1) / 2;

    auto consider = [&](std::size_t i, std::size_t j) {
        const double dist = pair_distance(set, i, j, Q.s);
        if (!(dist > rho)) return;
        ++rep.pairs_evaluated;
        const double q = std::abs(set.v[i] - set.v[j]) / std::pow(dist, alpha);
        if (q > rep.seminorm) {
            rep.seminorm = q;
            rep.argmax_p.assign(set.x.begin() + static_cast<std::ptrdiff_t>(i * static_cast<std::size_t>(set.d)),
                                set.x.begin() + static_cast<std::ptrdiff_t>((i + 1) * static_cast<std::size_t>(set.d)));
            rep.argmax_p.push_back(set.t[i]);
            rep.argmax_q.assign(set.x.begin() + static_cast<std::ptrdiff_t>(j * static_cast<std::size_t>(set.d)),
                                set.x.begin() + static_cast<std::ptrdiff_t>((j + 1) * static_cast<std::size_t>(set.d)));
            rep.argmax_q.push_back(set.t[j]);
        }
    };

    if (total_pairs <= budget) {
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = i + 1; j < m; ++j) consider(i, j);
    } else {
        // Stratified by first index: every sample point appears in roughly
        // budget/m sampled pairs.
        rep.subsampled = true;
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<std::size_t> pick(0, m - 1);
        const std::size_t per = std::max<std::size_t>(1, budget / m);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t k = 0; k < per; ++k) {
                std::size_t j = pick(rng);
                if (j != i) consider(i, j);
            }
        }
    }
    if (rep.pairs_evaluated == 0) rep.degenerate = true;
    return rep;
}

HarnackReport weak_harnack_ratio(const SpaceTimeField& field, const Cylinder& Q, double a) {
    const GridSpec& g = field.grid;
    if (static_cast<int>(Q.center.size()) != g.d)
        throw config_error("weak_harnack_ratio: cylinder dimension mismatch");
    for (double c : Q.center)
        if (c != 0.0) throw config_error("weak_harnack_ratio: cylinder must be anchored at the origin");
    if (Q.t0 != 0.0) throw config_error("weak_harnack_ratio: cylinder must end at t = 0");
    if (!(a >= 0.0)) throw config_error("weak_harnack_ratio: forcing bound a must be >= 0");
    if (g.periodic())
        throw config_error("weak_harnack_ratio: needs a constant-type extension for the weighted tail");
    if (Q.R > g.L) throw config_error("weak_harnack_ratio: B_R must lie inside the grid box");

    // Hypothesis of the weak Harnack theorems: u >= 0 on all of R^d x I_R.
    const double far_c = g.far_constant();
    if (far_c < 0.0)
        throw numerical_error("weak_harnack_ratio: exterior constant is negative (u >= 0 required)");
    for (std::size_t ti = 0; ti < field.snapshots.size(); ++ti) {
        for (std::size_t f = 0; f < field.snapshots[ti].size(); ++f) {
            if (field.snapshots[ti][f] < 0.0) {
                std::ostringstream msg;
                msg << "weak_harnack_ratio: field is negative (" << field.snapshots[ti][f]
                    << ") at node " << f << ", snapshot " << ti << "; u >= 0 required";
                throw numerical_error(msg.str());
            }
        }
    }

    HarnackReport rep;
    rep.forcing_bound = a;
    const double s2 = 2.0 * Q.s;
    const double h = g.h();

    // inf over Q_{R/2}
    const double half_lo = -std::pow(0.5 * Q.R, s2);
    double inf_v = std::numeric_limits<double>::infinity();
    std::size_t inf_samples = 0;
    std::vector<double> p(static_cast<std::size_t>(g.d));
    std::vector<std::size_t> half_nodes;
    for (std::size_t f = 0; f < g.node_count(); ++f) {
        g.node_point(f, p);
        double r2 = 0.0;
        for (double c : p) r2 += c * c;
        if (r2 <= 0.25 * Q.R * Q.R * (1.0 + 1e-12)) half_nodes.push_back(f);
    }
    for (std::size_t ti = 0; ti < field.times.size(); ++ti) {
        const double tt = field.times[ti];
        if (!(tt > half_lo && tt <= 0.0)) continue;
        for (std::size_t f : half_nodes) {
            inf_v = std::min(inf_v, field.snapshots[ti][f]);
            ++inf_samples;
        }
    }
    if (inf_samples == 0)
        throw config_error("weak_harnack_ratio: no samples in Q_{R/2}; field too coarse");
    rep.inf_value = inf_v;

    // weighted mass over I_R \ I_{R/2}: box nodes inside B_L by the midpoint
    // rule, the constant extension beyond |x| = L in closed form.
    const double win_lo = -std::pow(Q.R, s2);
    const double win_hi = half_lo;
    const auto tw = time_cell_weights(field, win_lo, win_hi);
    const double window = win_hi - win_lo;

    std::vector<double> wnode(g.node_count(), 0.0);
    std::vector<std::size_t> mass_nodes;
    std::vector<std::size_t> avg_nodes;
    std::vector<int> idx(static_cast<std::size_t>(g.d));
    for (std::size_t f = 0; f < g.node_count(); ++f) {
        g.node_point(f, p);
        g.unflatten(f, idx);
        double r2 = 0.0;
        for (double c : p) r2 += c * c;
        const double r = std::sqrt(r2);
        if (r > g.L) continue;
        double cell = 1.0;
        for (int k = 0; k < g.d; ++k) {
            const bool edge = !g.periodic() && (idx[static_cast<std::size_t>(k)] == 0 ||
                                                idx[static_cast<std::size_t>(k)] == g.n - 1);
            cell *= edge ? 0.5 * h : h;
        }
        wnode[f] = cell * std::pow(Q.R + r, -(g.d + s2));
        mass_nodes.push_back(f);
        if (r <= Q.R * (1.0 + 1e-12)) avg_nodes.push_back(f);
    }

    double mass = 0.0;
    double avg_sum = 0.0, avg_weight = 0.0;
    for (std::size_t ti = 0; ti < field.times.size(); ++ti) {
        if (tw[ti] == 0.0) continue;
        double slice = 0.0;
        for (std::size_t f : mass_nodes) slice += wnode[f] * field.snapshots[ti][f];
        mass += tw[ti] * slice;
        double asum = 0.0;
        for (std::size_t f : avg_nodes) asum += field.snapshots[ti][f];
        avg_sum += tw[ti] * asum;
        avg_weight += tw[ti] * static_cast<double>(avg_nodes.size());
    }
    mass += far_c * weight_tail(g.d, Q.s, Q.R, g.L) * window;
    rep.weighted_mass = mass;
    rep.plain_average = (avg_weight > 0.0) ? avg_sum / avg_weight : 0.0;

    if (mass > 0.0) {
        rep.empirical_c = (rep.inf_value + a) / mass;
    } else {
        rep.degenerate = true;
    }
    rep.empirical_c_plain =
        (rep.plain_average > 0.0) ? (rep.inf_value + a) / rep.plain_average : 0.0;
    if (rep.plain_average <= 0.0) rep.degenerate = true;
    return rep;
}

namespace {

bool cylinder_osc(const SpaceTimeField& field, double R, double s, double& osc_out) {
    const GridSpec& g = field.grid;
    const double lo = -std::pow(R, 2.0 * s);
    double vmin = std::numeric_limits<double>::infinity();
    double vmax = -vmin;
    std::size_t count = 0;
    std::vector<double> p(static_cast<std::size_t>(g.d));
    std::vector<std::size_t> nodes;
    for (std::size_t f = 0; f < g.node_count(); ++f) {
        g.node_point(f, p);
        double r2 = 0.0;
        for (double c : p) r2 += c * c;
        if (r2 <= R * R * (1.0 + 1e-12)) nodes.push_back(f);
    }
    if (nodes.size() < 2) return false;
    for (std::size_t ti = 0; ti < field.times.size(); ++ti) {
        const double tt = field.times[ti];
        if (!(tt > lo && tt <= 0.0)) continue;
        for (std::size_t f : nodes) {
            vmin = std::min(vmin, field.snapshots[ti][f]);
            vmax = std::max(vmax, field.snapshots[ti][f]);
            ++count;
        }
    }
    if (count == 0) return false;
    osc_out = vmax - vmin;
    return true;
}

}  // namespace

OscillationDecay oscillation_decay(const SpaceTimeField& field, double R, int levels, double s) {
    if (!(R > 0.0) || levels < 0) throw config_error("oscillation_decay: bad R or levels");
    OscillationDecay out;
    for (int k = 0; k <= levels; ++k) {
        const double Rk = R * std::pow(4.0, -k);
        double osc = 0.0;
        if (!cylinder_osc(field, Rk, s, osc)) {
            out.truncated = true;
            break;
        }
        out.osc.push_back(osc);
    }
    return out;
}

AlphaEstimate estimate_alpha(const SpaceTimeField& field, const Cylinder& Q, double rho) {
    for (double c : Q.center)
        if (c != 0.0) throw config_error("estimate_alpha: cylinder must be anchored at the origin");
    const double h = field.grid.h();
    const double floor_r = std::max({rho, 2.0 * h});
    int levels = 0;
    while (Q.R * std::pow(4.0, -(levels + 1)) >= floor_r && levels < 16) ++levels;

    AlphaEstimate est;
    OscillationDecay dec = oscillation_decay(field, Q.R, levels, Q.s);
    est.osc = dec.osc;

    bool all_zero = true;
    for (double o : dec.osc) all_zero = all_zero && o == 0.0;
    if (all_zero) {
        est.degenerate = true;
        return est;
    }

    std::vector<double> xs, ys;
    for (std::size_t k = 0; k < dec.osc.size(); ++k) {
        if (dec.osc[k] > 0.0) {
            xs.push_back(static_cast<double>(k));
            ys.push_back(std::log(dec.osc[k]));
        }
    }
    if (xs.size() < 3)
        throw numerical_error("estimate_alpha: fewer than 3 usable oscillation levels");

    const double n = static_cast<double>(xs.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / n;
    est.alpha_hat = -slope / std::log(4.0);
    est.levels_used = static_cast<int>(xs.size());
    double rss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (intercept + slope * xs[i]);
        rss += r * r;
    }
    est.residual_rms = std::sqrt(rss / n);
    return est;
}

}  // namespace trunckern
