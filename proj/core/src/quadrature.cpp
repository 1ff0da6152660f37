#include "trunckern/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include "trunckern/errors.hpp"

namespace trunckern {

double sphere_surface(int d) {
    if (d < 1) throw config_error("sphere_surface: d must be >= 1");
    switch (d) {
        case 1: return 2.0;
        case 2: return 2.0 * std::numbers::pi;
        case 3: return 4.0 * std::numbers::pi;
        default: return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
    }
}

namespace {

GaussRule make_gauss_legendre(int order) {
    GaussRule rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    const int n = order;
    for (int k = 0; k < (n + 1) / 2; ++k) {
        // Newton iteration for the k-th root of P_n from the Chebyshev guess.
        double x = std::cos(std::numbers::pi * (k + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[k] = -x;
        rule.nodes[n - 1 - k] = x;
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.weights[k] = w;
        rule.weights[n - 1 - k] = w;
    }
    return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int order) {
    static std::mutex mu;
    static std::map<int, GaussRule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, make_gauss_legendre(order)).first;
    return it->second;
}

double integrate_panels(const std::function<double(double)>& f, double a, double b,
                        int panels, int order) {
    const GaussRule& rule = gauss_legendre(order);
    const double w = (b - a) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * w;
        double acc = 0.0;
        for (int k = 0; k < order; ++k) {
            acc += rule.weights[k] * f(lo + 0.5 * w * (rule.nodes[k] + 1.0));
        }
        total += acc * 0.5 * w;
    }
    return total;
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, const char* what) {
    if (!(b > a)) return 0.0;
    double prev = integrate_panels(f, a, b, 1);
    for (int panels = 2; panels <= (1 << 16); panels *= 2) {
        double cur = integrate_panels(f, a, b, panels);
        double scale = std::max({std::abs(cur), std::abs(prev), 1e-300});
        if (std::abs(cur - prev) <= rel_tol * scale) return cur;
        prev = cur;
    }
    std::ostringstream msg;
    msg << "quadrature did not converge for " << what << " on [" << a << ", " << b
        << "]; last estimate " << prev;
    throw numerical_error(msg.str());
}

std::vector<QuadNode> annulus_rule(int d, double r1, double r2, int radial, int angular) {
    if (d < 1 || d > 3) throw config_error("annulus_rule: only d in {1,2,3} is supported");
    if (!(r2 > r1) || !(r1 >= 0.0)) throw config_error("annulus_rule: need 0 <= r1 < r2");
    std::vector<QuadNode> nodes;
    const double dr = (r2 - r1) / radial;
    if (d == 1) {
        nodes.reserve(2 * static_cast<std::size_t>(radial));
        for (int i = 0; i < radial; ++i) {
            const double r = r1 + (i + 0.5) * dr;
            nodes.push_back({{r}, dr});
            nodes.push_back({{-r}, dr});
        }
        return nodes;
    }
    if (d == 2) {
        const double dth = 2.0 * std::numbers::pi / angular;
        nodes.reserve(static_cast<std::size_t>(radial) * angular);
        for (int i = 0; i < radial; ++i) {
            const double r = r1 + (i + 0.5) * dr;
            for (int k = 0; k < angular; ++k) {
                const double th = (k + 0.5) * dth;
                nodes.push_back({{r * std::cos(th), r * std::sin(th)}, r * dr * dth});
            }
        }
        return nodes;
    }
    // d == 3: product rule in z = cos(polar) and azimuth.
    const int nz = angular;
    const int nth = angular;
    const double dz = 2.0 / nz;
    const double dth = 2.0 * std::numbers::pi / nth;
    nodes.reserve(static_cast<std::size_t>(radial) * nz * nth);
    for (int i = 0; i < radial; ++i) {
        const double r = r1 + (i + 0.5) * dr;
        for (int iz = 0; iz < nz; ++iz) {
            const double z = -1.0 + (iz + 0.5) * dz;
            const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
            for (int k = 0; k < nth; ++k) {
                const double th = (k + 0.5) * dth;
                nodes.push_back({{r * rho * std::cos(th), r * rho * std::sin(th), r * z},
                                 r * r * dr * dz * dth});
            }
        }
    }
    return nodes;
}

namespace {

template <typename Accum>
auto refine_annulus(int d, double r1, double r2, int initial_nodes, double rel_tol,
                    const char* what, const Accum& accumulate) {
    int radial = std::max(2, initial_nodes);
    int angular = (d == 1) ? 2 : std::max(4, initial_nodes);
    auto prev = accumulate(annulus_rule(d, r1, r2, radial, angular));
    for (int step = 0; step < 18; ++step) {
        radial *= 2;
        if (d > 1) angular *= 2;
        auto cur = accumulate(annulus_rule(d, r1, r2, radial, angular));
        double diff = 0.0, scale = 1e-300;
        for (std::size_t i = 0; i < cur.size(); ++i) {
            diff = std::max(diff, std::abs(cur[i] - prev[i]));
            scale = std::max(scale, std::abs(cur[i]));
        }
        if (diff <= rel_tol * std::max(scale, 1e-300)) return cur;
        prev = cur;
    }
    std::ostringstream msg;
    msg << "annulus quadrature did not converge for " << what << " on (" << r1 << ", " << r2
        << "); achieved estimate " << prev[0];
    throw numerical_error(msg.str());
}

}  // namespace

double annulus_integral(int d, double r1, double r2,
                        const std::function<double(std::span<const double>)>& g,
                        int initial_nodes, double rel_tol, const char* what) {
    auto accum = [&](const std::vector<QuadNode>& nodes) {
        std::vector<double> out(1, 0.0);
        for (const auto& q : nodes) out[0] += q.w * g(q.y);
        return out;
    };
    return refine_annulus(d, r1, r2, initial_nodes, rel_tol, what, accum)[0];
}

std::vector<double> annulus_vector_integral(int d, double r1, double r2,
                                            const std::function<double(std::span<const double>)>& g,
                                            int initial_nodes, double rel_tol, const char* what) {
    auto accum = [&](const std::vector<QuadNode>& nodes) {
        std::vector<double> out(static_cast<std::size_t>(d), 0.0);
        for (const auto& q : nodes) {
            const double gv = q.w * g(q.y);
            for (int k = 0; k < d; ++k) out[static_cast<std::size_t>(k)] += gv * q.y[static_cast<std::size_t>(k)];
        }
        return out;
    };
    return refine_annulus(d, r1, r2, initial_nodes, rel_tol, what, accum);
}

}  // namespace trunckern
