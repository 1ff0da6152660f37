#pragma once

#include <functional>
#include <span>
#include <vector>

namespace trunckern {

/// Surface measure of the unit sphere S^{d-1} (2, 2*pi, 4*pi, ...).
double sphere_surface(int d);

/// Gauss-Legendre rule of the given order on [-1, 1]. Cached per order.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const GaussRule& gauss_legendre(int order);

/// Composite Gauss-Legendre integral of f over [a, b] with `panels` equal panels.
double integrate_panels(const std::function<double(double)>& f, double a, double b,
                        int panels, int order = 8);

/// Panel-doubling Gauss-Legendre integral of f over [a, b]; refines until the
/// relative change is below rel_tol. Throws numerical_error naming `what` when
/// the refinement limit is hit, reporting the last two estimates.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, const char* what);

/// One node of a product quadrature rule in R^d.
struct QuadNode {
    std::vector<double> y;
    double w = 0.0;
};

/// Tensor midpoint rule (radial x angular) on the annulus r1 < |y| < r2.
/// d = 1 uses the two directions; d = 2 uniform angles; d = 3 a product rule
/// in (cos(polar), azimuth).
std::vector<QuadNode> annulus_rule(int d, double r1, double r2, int radial, int angular);

/// Integral of g over the annulus r1 < |y| < r2 by the midpoint rule above,
/// with node counts doubled until the relative change is below rel_tol.
double annulus_integral(int d, double r1, double r2,
                        const std::function<double(std::span<const double>)>& g,
                        int initial_nodes, double rel_tol, const char* what);

/// Vector integral of y * g(y) over the annulus (first-moment cancellation check).
std::vector<double> annulus_vector_integral(int d, double r1, double r2,
                                            const std::function<double(std::span<const double>)>& g,
                                            int initial_nodes, double rel_tol, const char* what);

}  // namespace trunckern
