#include "trunckern/operators.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "trunckern/errors.hpp"
#include "trunckern/parallel.hpp"
#include "trunckern/quadrature.hpp"

namespace trunckern {

void OperatorConfig::validate(int grid_d) const {
    params.validate();
    if (params.d != grid_d) throw config_error("OperatorConfig: params.d does not match the grid dimension");

    auto check_drift = [&](std::span<const double> b) {
        if (b.empty()) return;
        if (static_cast<int>(b.size()) != grid_d)
            throw config_error("OperatorConfig: drift dimension mismatch");
        if (params.s < 0.5) throw config_error("drift requires s >= 1/2");
        for (double v : b) {
            if (!std::isfinite(v)) throw config_error("OperatorConfig: non-finite drift");
            if (std::abs(v) > params.Lambda * (1.0 + 1e-12))
                throw config_error("OperatorConfig: drift exceeds the Lambda bound");
        }
    };

    switch (kind) {
        case OperatorKind::Linear:
            if (!kernel.eval) throw config_error("OperatorConfig: linear kind requires a kernel");
            if (kernel.params.d != grid_d) throw config_error("OperatorConfig: kernel dimension mismatch");
            check_drift(drift);
            break;
        case OperatorKind::PucciMinus:
        case OperatorKind::PucciPlus:
            if (!drift.empty())
                throw config_error("OperatorConfig: extremal kinds take no explicit drift");
            break;
        case OperatorKind::Isaac: {
            if (isaac_family.empty()) throw config_error("OperatorConfig: empty Isaac family");
            for (const auto& group : isaac_family) {
                if (group.empty()) throw config_error("OperatorConfig: empty Isaac inner group");
                for (const auto& m : group) {
                    if (!m.kernel.eval) throw config_error("OperatorConfig: Isaac member without kernel");
                    if (m.kernel.params.d != grid_d)
                        throw config_error("OperatorConfig: Isaac member dimension mismatch");
                    check_drift(m.drift);
                }
            }
            break;
        }
    }
}

double apply_difference(const GridFunction& u, std::span<const int> node,
                        std::span<const double> y, std::span<const double> gradient_at_x,
                        double s) {
    const GridSpec& g = u.spec;
    std::vector<double> x(static_cast<std::size_t>(g.d));
    for (int k = 0; k < g.d; ++k) x[static_cast<std::size_t>(k)] = g.coord(node[static_cast<std::size_t>(k)]);
    const double ux = u.values[g.flatten(node)];

    std::vector<double> xy(x);
    double norm = 0.0;
    for (int k = 0; k < g.d; ++k) {
        xy[static_cast<std::size_t>(k)] += y[static_cast<std::size_t>(k)];
        norm += y[static_cast<std::size_t>(k)] * y[static_cast<std::size_t>(k)];
    }
    norm = std::sqrt(norm);

    double delta = u.value_at_point(xy) - ux;
    const bool compensate = (s > 0.5) || (s == 0.5 && norm <= 1.0);
    if (s >= 0.5 && compensate) {
        for (int k = 0; k < g.d; ++k)
            delta -= y[static_cast<std::size_t>(k)] * gradient_at_x[static_cast<std::size_t>(k)];
    }
    return delta;
}

namespace {

/// Resolves u(x + jh) through the extension policy.
struct Accessor {
    const GridSpec& g;
    const double* vals;
    int d;
    int n;
    double h;
    Extension::Kind kind;
    double cvalue;
    const GridFunction* exterior;

    explicit Accessor(const GridFunction& u)
        : g(u.spec),
          vals(u.values.data()),
          d(u.spec.d),
          n(u.spec.n),
          h(u.spec.h()),
          kind(u.spec.extension.kind),
          cvalue(u.spec.extension.value),
          exterior(u.spec.extension.exterior.get()) {}

    double fetch(const int* idx, const double* x, const int* j) const {
        std::size_t f = 0;
        bool inside = true;
        for (int k = 0; k < d; ++k) {
            int t = idx[k] + j[k];
            if (kind == Extension::Kind::Periodic) {
                t %= n;
                if (t < 0) t += n;
            } else if (t < 0 || t >= n) {
                inside = false;
                break;
            }
            f = f * static_cast<std::size_t>(n) + static_cast<std::size_t>(t);
        }
        if (inside) return vals[f];
        if (kind == Extension::Kind::Constant) return cvalue;
        // Given extension: evaluate the exterior data at the physical point.
        double p[3];
        for (int k = 0; k < d; ++k) p[k] = x[k] + j[k] * h;
        return exterior->value_at_point(std::span<const double>(p, static_cast<std::size_t>(d)));
    }
};

std::vector<double> shell_axis_moments(const KernelFn& k, double h) {
    const int d = k.params.d;
    std::vector<double> m(static_cast<std::size_t>(d), 0.0);
    for (int axis = 0; axis < d; ++axis) {
        auto g = [&k, axis](std::span<const double> y) {
            return y[static_cast<std::size_t>(axis)] * y[static_cast<std::size_t>(axis)] * k.eval(y);
        };
        double acc = 0.0;
        for (int i = 0; i < 240; ++i) {
            const double hi = h * std::ldexp(1.0, -i);
            const double lo = 0.5 * hi;
            const double part = annulus_integral(d, lo, hi, g, 8, 1e-9, "near-field moment shell");
            acc += part;
            if (i > 4 && part <= 1e-13 * std::max(acc, 1e-300)) break;
        }
        m[static_cast<std::size_t>(axis)] = acc;
    }
    return m;
}

}  // namespace

std::vector<double> near_field_moments_quadrature(const KernelFn& k, double h) {
    return shell_axis_moments(k, h);
}

std::vector<double> near_field_moments(const KernelFn& k, double h) {
    const int d = k.params.d;
    if (k.builtin) {
        // Radial symmetry splits the |y|^2 moment evenly across axes.
        const double total = builtin_radial_moment(k.params, k.scale, 2.0, 0.0, h);
        return std::vector<double>(static_cast<std::size_t>(d), total / d);
    }
    return shell_axis_moments(k, h);
}

NonlocalOperator::NonlocalOperator(const GridSpec& grid, const OperatorConfig& cfg)
    : grid_(grid), cfg_(cfg) {
    grid_.validate();
    cfg_.validate(grid_.d);
    d_ = grid_.d;
    h_ = grid_.h();
    rho_below_h_ = cfg_.params.truncated() && cfg_.params.rho < h_;

    const bool periodic = grid_.periodic();
    far_radius_ = periodic ? 0.0 : grid_.far_reach();

    // Enumerate lattice offsets j != 0: the minimal image for periodic grids,
    // |j h| <= far_reach otherwise.
    int m_axis = periodic ? (grid_.n - 1) / 2
                          : static_cast<int>(std::ceil(far_radius_ / h_));
    std::vector<int> j(static_cast<std::size_t>(d_), -m_axis);
    std::unordered_map<long long, std::size_t> index_of;
    auto key_of = [&](const std::vector<int>& v) {
        long long key = 0;
        for (int k = 0; k < d_; ++k) key = key * (2LL * m_axis + 1) + (v[static_cast<std::size_t>(k)] + m_axis);
        return key;
    };
    while (true) {
        bool zero = true;
        double ni2 = 0.0;
        for (int k = 0; k < d_; ++k) {
            zero = zero && j[static_cast<std::size_t>(k)] == 0;
            ni2 += static_cast<double>(j[static_cast<std::size_t>(k)]) * j[static_cast<std::size_t>(k)];
        }
        const double ni = std::sqrt(ni2);
        if (!zero && (periodic || ni * h_ <= far_radius_ * (1.0 + 1e-12))) {
            index_of[key_of(j)] = count_;
            for (int k = 0; k < d_; ++k) j_.push_back(j[static_cast<std::size_t>(k)]);
            r_.push_back(ni * h_);
            ring_.push_back(std::max(0, std::ilogb(ni)));
            ++count_;
        }
        int k = d_ - 1;
        while (k >= 0 && j[static_cast<std::size_t>(k)] == m_axis) {
            j[static_cast<std::size_t>(k)] = -m_axis;
            --k;
        }
        if (k < 0) break;
        ++j[static_cast<std::size_t>(k)];
    }

    mirror_.resize(count_);
    for (std::size_t o = 0; o < count_; ++o) {
        std::vector<int> neg(static_cast<std::size_t>(d_));
        bool positive = false, decided = false;
        for (int k = 0; k < d_; ++k) {
            const int jk = j_[o * static_cast<std::size_t>(d_) + static_cast<std::size_t>(k)];
            neg[static_cast<std::size_t>(k)] = -jk;
            if (!decided && jk != 0) {
                positive = jk > 0;
                decided = true;
            }
        }
        auto it = index_of.find(key_of(neg));
        if (it == index_of.end()) throw numerical_error("offset table is not symmetric");
        mirror_[o] = it->second;
        if (positive) half_.push_back(o);
    }

    nrings_ = 0;
    for (int rg : ring_) nrings_ = std::max(nrings_, rg + 1);
    std::vector<char> nonempty(static_cast<std::size_t>(nrings_), 0);
    for (int rg : ring_) nonempty[static_cast<std::size_t>(rg)] = 1;
    ring_donor_.resize(static_cast<std::size_t>(nrings_));
    for (int i = 0; i < nrings_; ++i) {
        int best = -1;
        for (int dd = 0; dd < nrings_; ++dd) {
            if (i - dd >= 0 && nonempty[static_cast<std::size_t>(i - dd)]) { best = i - dd; break; }
            if (i + dd < nrings_ && nonempty[static_cast<std::size_t>(i + dd)]) { best = i + dd; break; }
        }
        ring_donor_[static_cast<std::size_t>(i)] = best;
    }

    const KernelParams& p = cfg_.params;
    switch (cfg_.kind) {
        case OperatorKind::Linear:
            build_member(linear_, cfg_.kernel, cfg_.drift);
            node_mass_ = linear_.mass;
            for (double b : cfg_.drift) node_mass_ += std::abs(b) / h_;
            break;
        case OperatorKind::PucciMinus:
        case OperatorKind::PucciPlus: {
            KernelFn low = make_truncated_fractional_kernel(p, p.lambda);
            build_member(linear_, low, {});
            slack_.assign(static_cast<std::size_t>(nrings_), 0.0);
            std::vector<double> ring_mass(static_cast<std::size_t>(nrings_), 0.0);
            for (std::size_t o = 0; o < count_; ++o)
                ring_mass[static_cast<std::size_t>(ring_[o])] += linear_.w[o];
            double slack_total = 0.0;
            for (int i = 0; i < nrings_; ++i) {
                const double cap = p.Lambda * std::pow(std::ldexp(1.0, i) * h_, -2.0 * p.s);
                slack_[static_cast<std::size_t>(i)] = std::max(0.0, cap - ring_mass[static_cast<std::size_t>(i)]);
                slack_total += slack_[static_cast<std::size_t>(i)];
            }
            node_mass_ = linear_.mass + slack_total;
            break;
        }
        case OperatorKind::Isaac: {
            std::vector<double> radii = geometric_radii(h_, grid_.L);
            node_mass_ = 0.0;
            isaac_.resize(cfg_.isaac_family.size());
            for (std::size_t gi = 0; gi < cfg_.isaac_family.size(); ++gi) {
                isaac_[gi].resize(cfg_.isaac_family[gi].size());
                for (std::size_t mi = 0; mi < cfg_.isaac_family[gi].size(); ++mi) {
                    const IsaacMember& src = cfg_.isaac_family[gi][mi];
                    ValidationReport rep = validate_ellipticity(src.kernel, radii, 16);
                    if (!rep.ok()) {
                        std::ostringstream msg;
                        msg << "Isaac member (" << gi << ", " << mi
                            << ") fails ellipticity validation (lower ratio " << rep.worst_lower_ratio
                            << ", annulus ratio " << rep.max_annulus_ratio << ")";
                        throw config_error(msg.str());
                    }
                    build_member(isaac_[gi][mi], src.kernel, src.drift);
                    double mm = isaac_[gi][mi].mass;
                    for (double b : src.drift) mm += std::abs(b) / h_;
                    node_mass_ = std::max(node_mass_, mm);
                }
            }
            break;
        }
    }
}

void NonlocalOperator::build_member(Member& m, const KernelFn& k,
                                    std::span<const double> drift) const {
    m.symmetric = k.is_symmetric;
    m.drift.assign(drift.begin(), drift.end());
    m.w.resize(count_);
    std::vector<double> y(static_cast<std::size_t>(d_));
    const double cell = std::pow(h_, d_);

    // In d = 1 the offsets closest to the singularity carry moment-matched
    // weights ∫_{cell} y^2 K / (jh)^2: the cell integral of K against the
    // quadratic increment model, which removes the kernel-curvature error of
    // the plain midpoint weight (dominant for s > 1/2).
    constexpr int kMatched = 8;
    std::vector<double> matched;
    if (d_ == 1) {
        int max_aj = 0;
        for (std::size_t o = 0; o < count_; ++o) max_aj = std::max(max_aj, std::abs(j_[o]));
        const int limit = std::min(kMatched, max_aj);
        matched.resize(static_cast<std::size_t>(limit) + 1, 0.0);
        for (int j = 1; j <= limit; ++j) {
            const double lo = (j - 0.5) * h_, hi = (j + 0.5) * h_;
            double second;
            if (k.builtin) {
                second = builtin_radial_moment(k.params, k.scale, 2.0, lo, hi);
            } else {
                auto g = [&k](std::span<const double> yy) {
                    return yy[0] * yy[0] * k.eval(yy);
                };
                second = annulus_integral(1, lo, hi, g, 16, 1e-10, "matched offset weight");
            }
            // one-sided weight: the radial integral covers both signs
            matched[static_cast<std::size_t>(j)] = 0.5 * second / (j * h_ * j * h_);
        }
    }

    for (std::size_t o = 0; o < count_; ++o) {
        for (int kk = 0; kk < d_; ++kk)
            y[static_cast<std::size_t>(kk)] = j_[o * static_cast<std::size_t>(d_) + static_cast<std::size_t>(kk)] * h_;
        const int aj = (d_ == 1) ? std::abs(j_[o]) : 0;
        if (d_ == 1 && aj < static_cast<int>(matched.size())) {
            m.w[o] = matched[static_cast<std::size_t>(aj)];
            continue;
        }
        const double kv = k.eval(y);
        if (!(kv >= 0.0) || !std::isfinite(kv)) {
            std::ostringstream msg;
            msg << "kernel value " << kv << " at offset radius " << r_[o]
                << " is not a finite nonnegative number";
            throw numerical_error(msg.str());
        }
        m.w[o] = kv * cell;
    }
    // The lattice cells tile |y| >= h/2, so the second-difference model covers
    // the remaining ball B_{h/2}.
    m.near_m = (cfg_.near_field == NearFieldMode::SecondDifference)
                   ? near_field_moments(k, 0.5 * h_)
                   : std::vector<double>(static_cast<std::size_t>(d_), 0.0);
    if (!grid_.periodic()) {
        if (k.builtin) {
            m.tail_mass = builtin_tail_mass(k.params, k.scale, far_radius_);
            m.tail_exact = true;
        } else {
            m.tail_mass = 0.0;
            m.tail_exact = false;
        }
    }
    m.mass = m.tail_mass;
    for (double w : m.w) m.mass += w;
    for (double mm : m.near_m) m.mass += mm / (h_ * h_);
}

void NonlocalOperator::apply_member_range(const Member& m, const GridFunction& u,
                                          GradientMode mode, std::vector<double>& out,
                                          std::size_t b, std::size_t e) const {
    Accessor acc(u);
    const double s = cfg_.params.s;
    const bool near = cfg_.near_field == NearFieldMode::SecondDifference;
    const bool has_drift = !m.drift.empty();
    const bool compensated = !m.symmetric && s >= 0.5;
    const double far_c = grid_.periodic() ? 0.0 : grid_.far_constant();
    const double inv_h2 = 1.0 / (h_ * h_);

    std::vector<int> idx(static_cast<std::size_t>(d_));
    std::vector<double> x(static_cast<std::size_t>(d_));
    std::vector<double> nb_plus(static_cast<std::size_t>(d_)), nb_minus(static_cast<std::size_t>(d_));
    std::vector<double> grad(static_cast<std::size_t>(d_), 0.0);
    std::vector<int> unit(static_cast<std::size_t>(d_), 0);

    for (std::size_t f = b; f < e; ++f) {
        grid_.unflatten(f, idx);
        grid_.node_point(f, x);
        const double u0 = u.values[f];

        // axis neighbors feed the near-field model, the compensator gradient
        // and the drift term
        for (int k = 0; k < d_; ++k) {
            std::fill(unit.begin(), unit.end(), 0);
            unit[static_cast<std::size_t>(k)] = 1;
            nb_plus[static_cast<std::size_t>(k)] = acc.fetch(idx.data(), x.data(), unit.data());
            unit[static_cast<std::size_t>(k)] = -1;
            nb_minus[static_cast<std::size_t>(k)] = acc.fetch(idx.data(), x.data(), unit.data());
        }
        if (compensated) {
            for (int k = 0; k < d_; ++k)
                grad[static_cast<std::size_t>(k)] =
                    (nb_plus[static_cast<std::size_t>(k)] - nb_minus[static_cast<std::size_t>(k)]) / (2.0 * h_);
        }

        double val = 0.0;
        if (m.symmetric) {
            for (std::size_t hi : half_) {
                const int* jp = &j_[hi * static_cast<std::size_t>(d_)];
                const double up = acc.fetch(idx.data(), x.data(), jp);
                const double um = acc.fetch(idx.data(), x.data(), &j_[mirror_[hi] * static_cast<std::size_t>(d_)]);
                val += (up + um - 2.0 * u0) * m.w[hi];
            }
        } else {
            for (std::size_t o = 0; o < count_; ++o) {
                const int* jp = &j_[o * static_cast<std::size_t>(d_)];
                double delta = acc.fetch(idx.data(), x.data(), jp) - u0;
                if (compensated && (s > 0.5 || r_[o] <= 1.0)) {
                    for (int k = 0; k < d_; ++k) delta -= jp[k] * h_ * grad[static_cast<std::size_t>(k)];
                }
                val += delta * m.w[o];
            }
        }

        if (near) {
            for (int k = 0; k < d_; ++k) {
                const double sd = (nb_plus[static_cast<std::size_t>(k)] + nb_minus[static_cast<std::size_t>(k)] - 2.0 * u0) * inv_h2;
                val += 0.5 * sd * m.near_m[static_cast<std::size_t>(k)];
            }
        }
        if (!grid_.periodic() && m.tail_mass != 0.0) val += (far_c - u0) * m.tail_mass;

        if (has_drift) {
            if (mode == GradientMode::Centered) {
                for (int k = 0; k < d_; ++k)
                    val += m.drift[static_cast<std::size_t>(k)] *
                           (nb_plus[static_cast<std::size_t>(k)] - nb_minus[static_cast<std::size_t>(k)]) / (2.0 * h_);
            } else {
                for (int k = 0; k < d_; ++k) {
                    const double bk = m.drift[static_cast<std::size_t>(k)];
                    val += (std::max(bk, 0.0) * (nb_plus[static_cast<std::size_t>(k)] - u0) +
                            std::min(bk, 0.0) * (u0 - nb_minus[static_cast<std::size_t>(k)])) / h_;
                }
            }
        }
        out[f] = val;
    }
}

void NonlocalOperator::apply_pucci_range(int sign, const GridFunction& u,
                                         std::vector<double>& out, std::size_t b,
                                         std::size_t e) const {
    Accessor acc(u);
    const double s = cfg_.params.s;
    const bool near = cfg_.near_field == NearFieldMode::SecondDifference;
    const double far_c = grid_.periodic() ? 0.0 : grid_.far_constant();
    const double inv_h2 = 1.0 / (h_ * h_);
    const Member& base = linear_;

    std::vector<int> idx(static_cast<std::size_t>(d_));
    std::vector<double> x(static_cast<std::size_t>(d_));
    std::vector<int> unit(static_cast<std::size_t>(d_), 0);
    std::vector<double> ring_max(static_cast<std::size_t>(nrings_));
    std::vector<double> ring_min(static_cast<std::size_t>(nrings_));
    std::vector<char> seen(static_cast<std::size_t>(nrings_));

    for (std::size_t f = b; f < e; ++f) {
        grid_.unflatten(f, idx);
        grid_.node_point(f, x);
        const double u0 = u.values[f];
        std::fill(seen.begin(), seen.end(), 0);

        double val = 0.0;
        auto update_ring = [&](int rg, double v) {
            auto ri = static_cast<std::size_t>(rg);
            if (!seen[ri]) {
                ring_max[ri] = ring_min[ri] = v;
                seen[ri] = 1;
            } else {
                ring_max[ri] = std::max(ring_max[ri], v);
                ring_min[ri] = std::min(ring_min[ri], v);
            }
        };

        if (s < 0.5) {
            // No compensator below s = 1/2: the mass budget may concentrate on
            // a single offset.
            for (std::size_t o = 0; o < count_; ++o) {
                const double delta = acc.fetch(idx.data(), x.data(), &j_[o * static_cast<std::size_t>(d_)]) - u0;
                val += delta * base.w[o];
                update_ring(ring_[o], delta);
            }
        } else {
            // s >= 1/2: budgets concentrate on symmetric pairs {y, -y}, for
            // which the compensators cancel identically.
            for (std::size_t hi : half_) {
                const double up = acc.fetch(idx.data(), x.data(), &j_[hi * static_cast<std::size_t>(d_)]);
                const double um = acc.fetch(idx.data(), x.data(), &j_[mirror_[hi] * static_cast<std::size_t>(d_)]);
                const double pair2 = up + um - 2.0 * u0;
                val += pair2 * base.w[hi];
                update_ring(ring_[hi], 0.5 * pair2);
            }
        }

        if (near) {
            for (int k = 0; k < d_; ++k) {
                std::fill(unit.begin(), unit.end(), 0);
                unit[static_cast<std::size_t>(k)] = 1;
                const double up = acc.fetch(idx.data(), x.data(), unit.data());
                unit[static_cast<std::size_t>(k)] = -1;
                const double um = acc.fetch(idx.data(), x.data(), unit.data());
                val += 0.5 * (up + um - 2.0 * u0) * inv_h2 * base.near_m[static_cast<std::size_t>(k)];
            }
        }
        if (!grid_.periodic() && base.tail_mass != 0.0) val += (far_c - u0) * base.tail_mass;

        for (int i = 0; i < nrings_; ++i) {
            const double sl = slack_[static_cast<std::size_t>(i)];
            if (sl == 0.0) continue;
            const auto src = static_cast<std::size_t>(ring_donor_[static_cast<std::size_t>(i)]);
            if (sign > 0) {
                val += sl * std::max(0.0, ring_max[src]);
            } else {
                val += sl * std::min(0.0, ring_min[src]);
            }
        }
        out[f] = val;
    }
}

GridFunction NonlocalOperator::apply(const GridFunction& u, GradientMode mode,
                                     OperatorDiagnostics* diag) const {
    if (!u.spec.same_lattice(grid_))
        throw config_error("NonlocalOperator::apply: grid mismatch");
    const std::size_t count = grid_.node_count();
    if (u.values.size() != count) throw config_error("NonlocalOperator::apply: value size mismatch");

    GridFunction result(grid_);
    result.spec.extension = u.spec.extension;
    std::vector<double>& out = result.values;

    switch (cfg_.kind) {
        case OperatorKind::Linear:
            parallel_for(count, [&](std::size_t b, std::size_t e) {
                apply_member_range(linear_, u, mode, out, b, e);
            });
            if (diag && !linear_.tail_exact && !grid_.periodic()) {
                const double osc = u.max() - u.min();
                const double s2 = 2.0 * cfg_.params.s;
                diag->dropped_tail_bound = cfg_.params.Lambda / (1.0 - std::pow(2.0, -s2)) *
                                           std::pow(far_radius_, -s2) * osc;
            }
            break;
        case OperatorKind::PucciMinus:
        case OperatorKind::PucciPlus: {
            const int sign = (cfg_.kind == OperatorKind::PucciPlus) ? 1 : -1;
            parallel_for(count, [&](std::size_t b, std::size_t e) {
                apply_pucci_range(sign, u, out, b, e);
            });
            break;
        }
        case OperatorKind::Isaac: {
            std::vector<double> buf(count);
            std::vector<double> inf_val(count, std::numeric_limits<double>::infinity());
            std::vector<double> sup_val(count);
            for (const auto& group : isaac_) {
                std::fill(sup_val.begin(), sup_val.end(), -std::numeric_limits<double>::infinity());
                for (const Member& m : group) {
                    parallel_for(count, [&](std::size_t b, std::size_t e) {
                        apply_member_range(m, u, mode, buf, b, e);
                    });
                    for (std::size_t f = 0; f < count; ++f) sup_val[f] = std::max(sup_val[f], buf[f]);
                }
                for (std::size_t f = 0; f < count; ++f) inf_val[f] = std::min(inf_val[f], sup_val[f]);
            }
            out = std::move(inf_val);
            break;
        }
    }
    result.check_finite("operator application");
    return result;
}

GridFunction apply_linear(const GridFunction& u, const OperatorConfig& cfg,
                          OperatorDiagnostics* diag) {
    if (cfg.kind != OperatorKind::Linear) throw config_error("apply_linear: kind must be linear");
    NonlocalOperator op(u.spec, cfg);
    return op.apply(u, GradientMode::Centered, diag);
}

GridFunction apply_pucci(const GridFunction& u, const OperatorConfig& cfg) {
    if (cfg.kind != OperatorKind::PucciMinus && cfg.kind != OperatorKind::PucciPlus)
        throw config_error("apply_pucci: kind must be an extremal operator");
    NonlocalOperator op(u.spec, cfg);
    return op.apply(u);
}

GridFunction apply_isaac(const GridFunction& u, const OperatorConfig& cfg) {
    if (cfg.kind != OperatorKind::Isaac) throw config_error("apply_isaac: kind must be isaac");
    NonlocalOperator op(u.spec, cfg);
    return op.apply(u);
}

GridFunction drift_envelope(const GridFunction& u, double Lambda, GradientMode mode) {
    const GridSpec& g = u.spec;
    GridFunction result(g);
    Accessor acc(u);
    const double h = g.h();
    const std::size_t count = g.node_count();

    parallel_for(count, [&](std::size_t b, std::size_t e) {
        std::vector<int> idx(static_cast<std::size_t>(g.d));
        std::vector<double> x(static_cast<std::size_t>(g.d));
        std::vector<int> unit(static_cast<std::size_t>(g.d), 0);
        for (std::size_t f = b; f < e; ++f) {
            g.unflatten(f, idx);
            g.node_point(f, x);
            const double u0 = u.values[f];
            double acc2 = 0.0;
            for (int k = 0; k < g.d; ++k) {
                std::fill(unit.begin(), unit.end(), 0);
                unit[static_cast<std::size_t>(k)] = 1;
                const double up = acc.fetch(idx.data(), x.data(), unit.data());
                unit[static_cast<std::size_t>(k)] = -1;
                const double um = acc.fetch(idx.data(), x.data(), unit.data());
                double gk;
                if (mode == GradientMode::Centered) {
                    gk = (up - um) / (2.0 * h);
                } else {
                    // largest one-sided slope: the monotone envelope bound
                    gk = std::max(std::abs(up - u0), std::abs(u0 - um)) / h;
                }
                acc2 += gk * gk;
            }
            result.values[f] = Lambda * std::sqrt(acc2);
        }
    });
    return result;
}

}  // namespace trunckern
