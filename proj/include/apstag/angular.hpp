#pragma once

// Angular discretization of the first velocity quadrant.
//
// A direction is parameterized by lambda in [0,1] through
//     xi = cos(lambda*pi/2),  eta = sin(lambda*pi/2),
// and integrals over lambda use an n-point Gauss-Legendre rule on [0,1].

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "apstag/errors.hpp"
#include "apstag/grid.hpp"

namespace apstag {

template <typename Scalar>
using Vector = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

/// Quadrature nodes and weights on [0,1] together with the mapped unit
/// directions. Nodes are strictly increasing and weights sum to one.
template <typename Scalar>
struct DirectionSet {
    Vector<Scalar> nodes;
    Vector<Scalar> weights;
    Vector<Scalar> xi;
    Vector<Scalar> eta;

    Eigen::Index size() const { return nodes.size(); }
};

template <typename Scalar>
std::pair<Scalar, Scalar> map_to_direction(Scalar lambda) {
    if (!(lambda >= Scalar(0) && lambda <= Scalar(1))) {
        throw InvalidArgument("map_to_direction: lambda must lie in [0,1]");
    }
    const Scalar angle = lambda * std::numbers::pi_v<Scalar> / Scalar(2);
    return {std::cos(angle), std::sin(angle)};
}

namespace detail {

// Legendre P_n(x) and its derivative by the three-term recurrence.
template <typename Scalar>
std::pair<Scalar, Scalar> legendre(int n, Scalar x) {
    Scalar p0 = 1;
    Scalar p1 = x;
    if (n == 0) return {Scalar(1), Scalar(0)};
    for (int k = 2; k <= n; ++k) {
        const Scalar pk = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = pk;
    }
    const Scalar dp = n * (x * p1 - p0) / (x * x - 1);
    return {p1, dp};
}

}  // namespace detail

/// n-point Gauss-Legendre rule transplanted to [0,1]. Roots of P_n are found
/// by Newton iteration from the Chebyshev-like initial guess.
template <typename Scalar>
DirectionSet<Scalar> gauss_nodes(int n) {
    if (n < 1) {
        throw InvalidArgument("gauss_nodes: need at least one node, got " + std::to_string(n));
    }
    constexpr Scalar pi = std::numbers::pi_v<Scalar>;
    const Scalar tol = Scalar(1e-15);

    DirectionSet<Scalar> q;
    q.nodes.resize(n);
    q.weights.resize(n);
    q.xi.resize(n);
    q.eta.resize(n);

    for (int k = 0; k < n; ++k) {
        // k-th root counted from the left end of [-1,1]
        Scalar x = -std::cos(pi * (Scalar(k) + Scalar(0.75)) / (Scalar(n) + Scalar(0.5)));
        Scalar dp = 0;
        for (int it = 0; it < 100; ++it) {
            auto [p, d] = detail::legendre(n, x);
            dp = d;
            const Scalar dx = p / d;
            x -= dx;
            if (std::abs(dx) <= tol) break;
        }
        dp = detail::legendre(n, x).second;
        const Scalar w = Scalar(2) / ((Scalar(1) - x * x) * dp * dp);
        q.nodes[k] = (x + Scalar(1)) / Scalar(2);
        q.weights[k] = w / Scalar(2);
    }
    for (int k = 0; k < n; ++k) {
        auto [c, s] = map_to_direction(q.nodes[k]);
        q.xi[k] = c;
        q.eta[k] = s;
    }
    return q;
}

/// rho = 1/2 sum_i w_i (r1_i + r2_i), accumulated in ascending direction order.
template <typename Scalar>
RField<Scalar> density(const std::vector<RField<Scalar>>& r1,
                       const std::vector<RField<Scalar>>& r2,
                       const DirectionSet<Scalar>& q) {
    const auto n = static_cast<std::size_t>(q.size());
    if (r1.size() != n || r2.size() != n) {
        throw ShapeMismatch("density: parity fields do not match the direction set");
    }
    if (n == 0) throw ShapeMismatch("density: empty direction set");
    RField<Scalar> rho = RField<Scalar>::zeros_like(r1[0]);
    for (std::size_t i = 0; i < n; ++i) {
        if (!same_shape(r1[i], r1[0]) || !same_shape(r2[i], r1[0])) {
            throw ShapeMismatch("density: parity fields live on different grids");
        }
        const Scalar half_w = q.weights[static_cast<Eigen::Index>(i)] / Scalar(2);
        rho.vertex += half_w * (r1[i].vertex + r2[i].vertex);
        rho.center += half_w * (r1[i].center + r2[i].center);
    }
    return rho;
}

}  // namespace apstag
