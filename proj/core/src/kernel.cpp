#include "trunckern/kernel.hpp"

#include <cmath>
#include <sstream>

#include "trunckern/errors.hpp"
#include "trunckern/quadrature.hpp"

namespace trunckern {

namespace {

double norm2(std::span<const double> y) {
    double acc = 0.0;
    for (double v : y) acc += v * v;
    return std::sqrt(acc);
}

std::string point_str(std::span<const double> y) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < y.size(); ++i) os << (i ? ", " : "") << y[i];
    os << ")";
    return os.str();
}

}  // namespace

void KernelParams::validate() const {
    if (d < 1) throw config_error("KernelParams: d must be >= 1");
    if (!(s > 0.0 && s < 1.0)) throw config_error("KernelParams: s must lie in (0, 1)");
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw config_error("KernelParams: lambda must be positive and finite");
    if (!(Lambda > 0.0) || !std::isfinite(Lambda))
        throw config_error("KernelParams: Lambda must be positive and finite");
    if (!(rho >= 0.0) || !std::isfinite(rho))
        throw config_error("KernelParams: rho must be >= 0 and finite");
}

double lower_envelope(const KernelParams& p, double r) {
    const double ex = -(p.d + 2.0 * p.s);
    if (r <= 0.0) {
        return p.truncated() ? p.lambda * std::pow(p.rho, ex)
                             : std::numeric_limits<double>::infinity();
    }
    double v = std::pow(r, ex);
    if (p.truncated()) v = std::min(v, std::pow(p.rho, ex));
    return p.lambda * v;
}

KernelFn make_truncated_fractional_kernel(const KernelParams& params, double scale) {
    params.validate();
    if (!std::isfinite(scale)) throw config_error("truncated fractional kernel: scale must be finite");
    if (scale < params.lambda)
        throw config_error("truncated fractional kernel: scale < lambda would violate the pointwise lower bound");

    KernelFn k;
    k.params = params;
    k.builtin = true;
    k.scale = scale;
    k.is_symmetric = true;
    k.is_integrable = params.truncated();
    const int d = params.d;
    const double ex = -(params.d + 2.0 * params.s);
    const double rho = params.rho;
    const double cap = params.truncated() ? std::pow(rho, ex) : std::numeric_limits<double>::infinity();
    k.eval = [d, ex, cap, scale](std::span<const double> y) {
        const double r = norm2(y.subspan(0, static_cast<std::size_t>(d)));
        if (r <= 0.0) return scale * cap;  // +inf for rho == 0; callers keep y != 0
        return scale * std::min(std::pow(r, ex), cap);
    };
    KernelParams p = params;
    k.closed_form_annulus_mass = [p, scale](double r) {
        return builtin_radial_moment(p, scale, 0.0, r, 2.0 * r);
    };
    return k;
}

KernelFn make_user_kernel(std::function<double(std::span<const double>)> eval,
                          const KernelParams& params, bool symmetric, bool integrable) {
    params.validate();
    KernelFn k;
    k.eval = std::move(eval);
    k.params = params;
    k.is_symmetric = symmetric;
    k.is_integrable = integrable;
    return k;
}

double builtin_radial_moment(const KernelParams& p, double scale, double alpha,
                             double a, double b) {
    if (!(a >= 0.0) || !(b > a)) throw config_error("builtin_radial_moment: need 0 <= a < b");
    const double s2 = 2.0 * p.s;
    const double wd = sphere_surface(p.d);

    // Radial integrand r^{d-1+alpha} * min(r^{-d-2s}, rho^{-d-2s}); antiderivatives:
    //   inner (r < rho):  rho^{-d-2s} r^{d+alpha} / (d+alpha)
    //   outer (r > rho):  r^{alpha-2s} / (alpha-2s), or log r when alpha == 2s
    auto inner = [&](double lo, double hi) {
        const double q = p.d + alpha;
        return std::pow(p.rho, -(p.d + s2)) * (std::pow(hi, q) - std::pow(lo, q)) / q;
    };
    auto outer = [&](double lo, double hi) {
        const double q = alpha - s2;
        if (std::isinf(hi)) {
            if (!(q < 0.0))
                throw numerical_error("builtin_radial_moment: divergent tail (alpha >= 2s)");
            return -std::pow(lo, q) / q;
        }
        if (lo <= 0.0 && !(q > 0.0))
            throw numerical_error("builtin_radial_moment: divergent at the origin (alpha <= 2s, rho = 0)");
        if (q == 0.0) return std::log(hi / lo);
        const double lo_term = (lo <= 0.0) ? 0.0 : std::pow(lo, q);
        return (std::pow(hi, q) - lo_term) / q;
    };

    double radial;
    if (!p.truncated()) {
        radial = outer(a, b);
    } else if (b <= p.rho) {
        radial = inner(a, b);
    } else if (a >= p.rho) {
        radial = outer(a, b);
    } else {
        radial = inner(a, p.rho) + outer(p.rho, b);
    }
    return scale * wd * radial;
}

double builtin_tail_mass(const KernelParams& p, double scale, double a) {
    return builtin_radial_moment(p, scale, 0.0, a, std::numeric_limits<double>::infinity());
}

double annulus_mass(const KernelFn& kernel, double r) {
    if (!(r > 0.0)) throw config_error("annulus_mass: r must be positive");
    if (kernel.closed_form_annulus_mass) return kernel.closed_form_annulus_mass(r);
    auto g = [&kernel](std::span<const double> y) { return kernel.eval(y); };
    return annulus_integral(kernel.params.d, r, 2.0 * r, g, 32, 1e-8, "annulus_mass");
}

std::optional<double> kernel_l1_norm(const KernelFn& kernel) {
    const KernelParams& p = kernel.params;
    if (kernel.builtin) {
        if (!p.truncated()) return std::nullopt;
        // Split at |y| = rho: flat cap inside, pure power law outside.
        return builtin_radial_moment(p, kernel.scale, 0.0, 0.0, p.rho) +
               builtin_tail_mass(p, kernel.scale, p.rho);
    }
    if (!kernel.is_integrable) return std::nullopt;
    auto g = [&kernel](std::span<const double> y) { return kernel.eval(y); };
    double total = 0.0;
    double shell_lo = std::ldexp(1.0, -30);
    // Inner ball below the smallest shell: midpoint-in-radius box estimate.
    {
        std::vector<double> probe(static_cast<std::size_t>(p.d), 0.0);
        probe[0] = 0.5 * shell_lo;
        const double vol = sphere_surface(p.d) / p.d * std::pow(shell_lo, p.d);
        total += vol * kernel.eval(probe);
    }
    for (int k = -30; k <= 40; ++k) {
        const double lo = std::ldexp(1.0, k);
        const double hi = std::ldexp(1.0, k + 1);
        const double m = annulus_integral(p.d, lo, hi, g, 16, 1e-8, "kernel_l1_norm shell");
        total += m;
        if (k > 4 && std::abs(m) <= 1e-12 * std::max(total, 1e-300)) return total;
    }
    throw numerical_error("kernel_l1_norm: shell sum did not converge; kernel may be non-integrable");
}

ValidationReport validate_ellipticity(const KernelFn& kernel, std::span<const double> radii,
                                      int quadrature_nodes_per_annulus) {
    if (radii.empty()) throw config_error("validate_ellipticity: radii must be nonempty");
    const KernelParams& p = kernel.params;
    const bool critical = (p.s == 0.5);

    ValidationReport rep;
    rep.sampled_radii.assign(radii.begin(), radii.end());
    rep.worst_lower_ratio = std::numeric_limits<double>::infinity();
    rep.max_annulus_ratio = 0.0;
    rep.max_symmetry_ratio = 0.0;
    rep.symmetry_checked = critical;
    rep.class_nonempty_ok = true;

    const int nodes = std::max(4, quadrature_nodes_per_annulus);
    for (double r : radii) {
        if (!(r > 0.0)) throw config_error("validate_ellipticity: radii must be positive");
        const double cap = p.Lambda * std::pow(r, -2.0 * p.s);
        const auto rule = annulus_rule(p.d, r, 2.0 * r, nodes, nodes);

        double mass = 0.0;
        std::vector<double> first_moment(static_cast<std::size_t>(p.d), 0.0);
        for (const auto& q : rule) {
            const double kv = kernel.eval(q.y);
            if (!std::isfinite(kv)) {
                throw numerical_error("validate_ellipticity: non-finite kernel value at node " +
                                      point_str(q.y));
            }
            const double low = lower_envelope(p, norm2(q.y));
            rep.worst_lower_ratio = std::min(rep.worst_lower_ratio, kv / low);
            mass += q.w * kv;
            if (critical) {
                for (int k = 0; k < p.d; ++k)
                    first_moment[static_cast<std::size_t>(k)] += q.w * kv * q.y[static_cast<std::size_t>(k)];
            }
        }
        if (kernel.closed_form_annulus_mass) mass = kernel.closed_form_annulus_mass(r);
        rep.max_annulus_ratio = std::max(rep.max_annulus_ratio, mass / cap);

        if (critical) {
            double fm = kernel.is_symmetric ? 0.0 : norm2(first_moment);
            rep.max_symmetry_ratio = std::max(rep.max_symmetry_ratio, fm / (r * cap));
        }

        const double low_mass = builtin_radial_moment(p, p.lambda, 0.0, r, 2.0 * r);
        if (low_mass > cap * (1.0 + 1e-12)) rep.class_nonempty_ok = false;
    }

    rep.lower_bound_ok = rep.worst_lower_ratio >= 1.0 - 1e-12;
    rep.annulus_bound_ok = rep.max_annulus_ratio <= 1.0 + 1e-12;
    rep.symmetry_ok = !critical || rep.max_symmetry_ratio <= 1e-10;
    return rep;
}

std::vector<double> geometric_radii(double r_min, double r_max) {
    if (!(r_min > 0.0) || !(r_max >= r_min)) throw config_error("geometric_radii: need 0 < r_min <= r_max");
    std::vector<double> out;
    for (double r = r_min; r <= r_max * (1.0 + 1e-12); r *= 2.0) out.push_back(r);
    return out;
}

}  // namespace trunckern
