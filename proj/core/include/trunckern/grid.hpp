#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace trunckern {

struct GridFunction;

/// Exterior policy supplying u on all of R^d beyond the computational box.
/// For nonlocal Dirichlet-style problems the `Given` variant carries the
/// exterior data g on a larger box, constant beyond that.
struct Extension {
    enum class Kind { Constant, Periodic, Given };

    Kind kind = Kind::Constant;
    double value = 0.0;  // Constant value; also the beyond-box value for Given
    std::shared_ptr<const GridFunction> exterior;

    static Extension constant(double c) { return {Kind::Constant, c, nullptr}; }
    static Extension periodic() { return {Kind::Periodic, 0.0, nullptr}; }
    static Extension given(std::shared_ptr<const GridFunction> g, double beyond = 0.0) {
        return {Kind::Given, beyond, std::move(g)};
    }
};

/// Uniform box grid on [-L, L]^d with n nodes per axis.
/// Spacing is 2L/(n-1); periodic grids use 2L/n (nodes cover [-L, L-h]).
struct GridSpec {
    int d = 1;
    double L = 1.0;
    int n = 8;
    Extension extension = Extension::constant(0.0);

    bool periodic() const { return extension.kind == Extension::Kind::Periodic; }
    double h() const { return periodic() ? 2.0 * L / n : 2.0 * L / (n - 1); }
    std::size_t node_count() const;
    double coord(int i) const { return -L + i * h(); }

    /// Fills `out` (size d) with the coordinates of the node at flat index f.
    void node_point(std::size_t f, std::span<double> out) const;

    /// Flat index of a multi-index (row-major).
    std::size_t flatten(std::span<const int> idx) const;
    void unflatten(std::size_t f, std::span<int> idx) const;

    /// The constant value u takes far from the box. Throws for periodic grids.
    double far_constant() const;
    /// Radius beyond which u(x + y) equals far_constant() for every node x.
    double far_reach() const;

    bool same_lattice(const GridSpec& o) const {
        return d == o.d && n == o.n && L == o.L && periodic() == o.periodic();
    }

    void validate() const;  // throws config_error on n < 8, L <= 0, bad exterior
};

/// Values of u on the grid nodes plus the exterior policy of the spec.
/// Evaluation at an arbitrary point is nearest-node inside the box and the
/// extension outside.
struct GridFunction {
    GridSpec spec;
    std::vector<double> values;

    GridFunction() = default;
    explicit GridFunction(GridSpec s, double fill = 0.0)
        : spec(std::move(s)), values(spec.node_count(), fill) {}

    double value_at_point(std::span<const double> p) const;

    double max() const;
    double min() const;
    double sup_norm() const;

    /// Throws numerical_error naming the first non-finite node, if any.
    void check_finite(const char* what) const;
};

/// Samples f at every node.
GridFunction sample_profile(const GridSpec& grid,
                            const std::function<double(std::span<const double>)>& f);

}  // namespace trunckern
