#include "trunckern/grid.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "trunckern/errors.hpp"

namespace trunckern {

std::size_t GridSpec::node_count() const {
    std::size_t c = 1;
    for (int k = 0; k < d; ++k) c *= static_cast<std::size_t>(n);
    return c;
}

void GridSpec::node_point(std::size_t f, std::span<double> out) const {
    for (int k = d - 1; k >= 0; --k) {
        out[static_cast<std::size_t>(k)] = coord(static_cast<int>(f % static_cast<std::size_t>(n)));
        f /= static_cast<std::size_t>(n);
    }
}

std::size_t GridSpec::flatten(std::span<const int> idx) const {
    std::size_t f = 0;
    for (int k = 0; k < d; ++k) f = f * static_cast<std::size_t>(n) + static_cast<std::size_t>(idx[static_cast<std::size_t>(k)]);
    return f;
}

void GridSpec::unflatten(std::size_t f, std::span<int> idx) const {
    for (int k = d - 1; k >= 0; --k) {
        idx[static_cast<std::size_t>(k)] = static_cast<int>(f % static_cast<std::size_t>(n));
        f /= static_cast<std::size_t>(n);
    }
}

double GridSpec::far_constant() const {
    switch (extension.kind) {
        case Extension::Kind::Constant: return extension.value;
        case Extension::Kind::Given: return extension.value;
        case Extension::Kind::Periodic:
            throw config_error("far_constant: periodic grids have no far field");
    }
    return 0.0;
}

double GridSpec::far_reach() const {
    const double sd = std::sqrt(static_cast<double>(d));
    if (extension.kind == Extension::Kind::Given && extension.exterior) {
        return sd * (L + extension.exterior->spec.L);
    }
    return 2.0 * sd * L;
}

void GridSpec::validate() const {
    if (d < 1) throw config_error("GridSpec: d must be >= 1");
    if (n < 8) throw config_error("GridSpec: n must be >= 8");
    if (!(L > 0.0) || !std::isfinite(L)) throw config_error("GridSpec: L must be positive and finite");
    if (extension.kind == Extension::Kind::Given) {
        if (!extension.exterior) throw config_error("GridSpec: given extension requires exterior data");
        const GridSpec& e = extension.exterior->spec;
        if (e.d != d) throw config_error("GridSpec: exterior dimension mismatch");
        if (e.L < L) throw config_error("GridSpec: exterior box must contain the grid box");
        if (e.extension.kind != Extension::Kind::Constant)
            throw config_error("GridSpec: exterior data must itself have a constant extension");
    }
}

namespace {

double nearest_inside(const GridSpec& g, std::span<const double> p) {
    // All coordinates are within the box; take the nearest node.
    std::size_t f = 0;
    const double h = g.h();
    for (int k = 0; k < g.d; ++k) {
        long i = std::lround((p[static_cast<std::size_t>(k)] + g.L) / h);
        if (i < 0) i = 0;
        if (i > g.n - 1) i = g.n - 1;
        f = f * static_cast<std::size_t>(g.n) + static_cast<std::size_t>(i);
    }
    return f;
}

}  // namespace

double GridFunction::value_at_point(std::span<const double> p) const {
    const GridSpec& g = spec;
    const double h = g.h();
    bool inside = true;
    for (int k = 0; k < g.d; ++k) {
        const double xk = p[static_cast<std::size_t>(k)];
        const double hi = g.periodic() ? g.L - h : g.L;
        if (xk < -g.L - 0.5 * h || xk > hi + 0.5 * h) {
            inside = false;
            break;
        }
    }
    if (inside) return values[static_cast<std::size_t>(nearest_inside(g, p))];

    switch (g.extension.kind) {
        case Extension::Kind::Constant:
            return g.extension.value;
        case Extension::Kind::Periodic: {
            std::vector<double> q(static_cast<std::size_t>(g.d));
            for (int k = 0; k < g.d; ++k) {
                double xk = p[static_cast<std::size_t>(k)];
                const double period = 2.0 * g.L;
                xk -= period * std::floor((xk + g.L) / period);
                q[static_cast<std::size_t>(k)] = xk;
            }
            return values[static_cast<std::size_t>(nearest_inside(g, q))];
        }
        case Extension::Kind::Given:
            return g.extension.exterior->value_at_point(p);
    }
    return 0.0;
}

double GridFunction::max() const {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : values) m = std::max(m, v);
    return m;
}

double GridFunction::min() const {
    double m = std::numeric_limits<double>::infinity();
    for (double v : values) m = std::min(m, v);
    return m;
}

double GridFunction::sup_norm() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

void GridFunction::check_finite(const char* what) const {
    for (std::size_t f = 0; f < values.size(); ++f) {
        if (!std::isfinite(values[f])) {
            std::vector<double> p(static_cast<std::size_t>(spec.d));
            spec.node_point(f, p);
            std::ostringstream msg;
            msg << what << ": non-finite value " << values[f] << " at node " << f << " (";
            for (int k = 0; k < spec.d; ++k) msg << (k ? ", " : "") << p[static_cast<std::size_t>(k)];
            msg << ")";
            throw numerical_error(msg.str());
        }
    }
}

GridFunction sample_profile(const GridSpec& grid,
                            const std::function<double(std::span<const double>)>& f) {
    GridFunction u(grid);
    std::vector<double> p(static_cast<std::size_t>(grid.d));
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        grid.node_point(i, p);
        u.values[i] = f(p);
    }
    return u;
}

}  // namespace trunckern
