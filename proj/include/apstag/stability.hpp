#pragma once

// Von Neumann analysis of the one-dimensional two-velocity split scheme.
//
// The 1D scheme keeps r on half points (m+1/2)h and j on full points mh.
// One step is an explicit transport update followed by the relaxation update
// that uses the already relaxed r:
//
//   r*   = r - dt (D j + sa r)
//   j*   = j - dt (phi D r + sa j)
//   r'   = r*
//   j'   = eps^2/(eps^2 + ss dt) j* - dt/(eps^2 + ss dt) (1 - eps^2 phi) D r'
//
// A Fourier mode a e^{i l x}, b e^{i l x} is multiplied by G = G2 G1 with
// d = (2i/h) sin(l h / 2).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "apstag/errors.hpp"

namespace apstag {

// ---------------------------------------------------------------------------
// Step-size and relaxation-parameter bounds of the L2-stability result.

/// min{ 1/sigma_a, max{ eps h / 2, h^2 sigma_t / 4 } }; sigma_a = 0 drops the
/// first branch.
template <typename Scalar>
Scalar stable_timestep_bound(Scalar epsilon, Scalar h, Scalar sigma_t, Scalar sigma_a) {
    const Scalar transport = std::max(epsilon * h / Scalar(2), h * h * sigma_t / Scalar(4));
    if (sigma_a > Scalar(0)) return std::min(Scalar(1) / sigma_a, transport);
    return transport;
}

/// True when the hyperbolic arm eps h / 2 is the larger one (h sigma_t <= 2 eps).
template <typename Scalar>
bool hyperbolic_branch(Scalar epsilon, Scalar h, Scalar sigma_t) {
    return h * sigma_t <= Scalar(2) * epsilon;
}

/// Upper bound for the relaxation parameter: h sigma_t / (2 eps^3) in the
/// hyperbolic regime, 1/eps^2 otherwise. Continuous at h sigma_t = 2 eps.
template <typename Scalar>
Scalar relaxation_parameter_bound(Scalar epsilon, Scalar h, Scalar sigma_t) {
    if (hyperbolic_branch(epsilon, h, sigma_t)) {
        return h * sigma_t / (Scalar(2) * epsilon * epsilon * epsilon);
    }
    return Scalar(1) / (epsilon * epsilon);
}

// ---------------------------------------------------------------------------

template <typename Scalar>
struct GrowthParams {
    Scalar epsilon = 1;
    Scalar sigma_s = 1;
    Scalar sigma_a = 0;
    Scalar dt = 0;
    Scalar h = 0;
    Scalar phi = 0;
    Scalar theta = 0;  ///< l*h in radians

    Scalar sigma_t() const { return sigma_s + epsilon * epsilon * sigma_a; }
    /// Squared discrete symbol d^2 = -(4/h^2) sin^2(theta/2), real and <= 0.
    Scalar symbol_squared() const {
        const Scalar s = std::sin(theta / Scalar(2));
        return -Scalar(4) / (h * h) * s * s;
    }
    std::complex<Scalar> symbol() const {
        return {Scalar(0), Scalar(2) / h * std::sin(theta / Scalar(2))};
    }
};

template <typename Scalar>
using Matrix2c = Eigen::Matrix<std::complex<Scalar>, 2, 2>;

template <typename Scalar>
struct GrowthMatrix {
    Matrix2c<Scalar> transport;   ///< G1
    Matrix2c<Scalar> relaxation;  ///< G2
    Matrix2c<Scalar> G;           ///< G2 * G1
    Scalar half_trace = 0;        ///< g, closed form
    Scalar det = 0;               ///< det G, closed form
};

template <typename Scalar>
void validate(const GrowthParams<Scalar>& p) {
    if (!(p.epsilon > 0)) throw InvalidArgument("growth params: epsilon must be positive");
    if (!(p.h > 0)) throw InvalidArgument("growth params: h must be positive");
    if (!(p.dt > 0)) throw InvalidArgument("growth params: dt must be positive");
    if (p.sigma_s < 0 || p.sigma_a < 0) throw InvalidArgument("growth params: negative cross section");
    if (!(p.sigma_t() > 0)) throw InvalidArgument("growth params: sigma_t must be positive");
    if (p.phi < 0) throw InvalidArgument("growth params: phi must be nonnegative");
}

template <typename Scalar>
GrowthMatrix<Scalar> growth_matrix(const GrowthParams<Scalar>& p) {
    validate(p);
    using C = std::complex<Scalar>;
    const Scalar eps2 = p.epsilon * p.epsilon;
    const Scalar denom = eps2 + p.sigma_s * p.dt;
    const Scalar damp = Scalar(1) - p.sigma_a * p.dt;
    const C d = p.symbol();

    GrowthMatrix<Scalar> m;
    m.transport << C(damp), -p.dt * d,
                   -p.dt * p.phi * d, C(damp);
    m.relaxation << C(1), C(0),
                    -(p.dt / denom) * (Scalar(1) - eps2 * p.phi) * d, C(eps2 / denom);
    m.G = m.relaxation * m.transport;

    const Scalar d2 = p.symbol_squared();
    m.half_trace = (p.dt * p.dt * d2 * (Scalar(1) - eps2 * p.phi) +
                    damp * (Scalar(2) * eps2 + p.sigma_s * p.dt)) /
                   (Scalar(2) * denom);
    m.det = eps2 / denom * (damp * damp - p.phi * d2 * p.dt * p.dt);
    return m;
}

template <typename Scalar>
struct Eigenpair {
    std::complex<Scalar> first;
    std::complex<Scalar> second;
    bool complex_pair = false;
};

/// lambda = g +- sqrt(g^2 - det), branching on the sign of the discriminant.
template <typename Scalar>
Eigenpair<Scalar> eigenvalues(const GrowthMatrix<Scalar>& m) {
    const Scalar g = m.half_trace;
    const Scalar disc = g * g - m.det;
    Eigenpair<Scalar> e;
    if (disc < 0) {
        const Scalar im = std::sqrt(-disc);
        e.first = {g, im};
        e.second = {g, -im};
        e.complex_pair = true;
    } else {
        const Scalar root = std::sqrt(disc);
        // larger-magnitude root first, the other from the product to avoid cancellation
        const Scalar big = g >= 0 ? g + root : g - root;
        e.first = big;
        e.second = big != Scalar(0) ? m.det / big : Scalar(0);
    }
    return e;
}

template <typename Scalar>
Scalar spectral_radius(const GrowthMatrix<Scalar>& m) {
    const auto e = eigenvalues(m);
    if (e.complex_pair) return std::sqrt(m.det);  // |lambda|^2 = g^2 + (det - g^2)
    return std::max(std::abs(e.first), std::abs(e.second));
}

template <typename Scalar>
Scalar spectral_radius(const GrowthParams<Scalar>& p) {
    return spectral_radius(growth_matrix(p));
}

// ---------------------------------------------------------------------------
// Certification of the stability result on a theta grid.

template <typename Scalar>
struct CertificationReport {
    bool timestep_ok = false;
    bool phi_ok = false;
    std::vector<std::string> violations;
    Scalar worst_theta = 0;
    Scalar worst_radius = 0;
    bool radius_ok = false;

    bool preconditions_ok() const { return timestep_ok && phi_ok; }
    /// Preconditions hold and no scanned mode grows.
    bool pass() const { return preconditions_ok() && radius_ok; }
};

inline constexpr double kRadiusTolerance = 1e-12;

/// Checks the timestep and relaxation-parameter conditions for `p` (theta is
/// ignored) and scans n_theta uniformly spaced modes in [0, 2 pi). The scan
/// runs even when a precondition fails so the report shows the growth.
template <typename Scalar>
CertificationReport<Scalar> certify_proposition(GrowthParams<Scalar> p, int n_theta = 4096) {
    if (n_theta < 8) throw InvalidArgument("certify_proposition: need at least 8 theta samples");
    validate(p);
    CertificationReport<Scalar> rep;
    const Scalar st = p.sigma_t();
    // equality is admissible; allow for the roundoff of computing the bound itself
    const Scalar slack = Scalar(1) + Scalar(64) * std::numeric_limits<Scalar>::epsilon();

    const Scalar dt_max = stable_timestep_bound(p.epsilon, p.h, st, p.sigma_a);
    rep.timestep_ok = p.dt <= dt_max * slack;
    if (!rep.timestep_ok) {
        rep.violations.push_back("dt=" + std::to_string(double(p.dt)) + " exceeds bound " +
                                 std::to_string(double(dt_max)));
    }
    const Scalar phi_max = relaxation_parameter_bound(p.epsilon, p.h, st);
    rep.phi_ok = p.phi >= 0 && p.phi <= phi_max * slack;
    if (!rep.phi_ok) {
        rep.violations.push_back("phi=" + std::to_string(double(p.phi)) + " exceeds bound " +
                                 std::to_string(double(phi_max)));
    }

    const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
    rep.worst_radius = -1;
    for (int k = 0; k < n_theta; ++k) {
        p.theta = two_pi * Scalar(k) / Scalar(n_theta);
        const Scalar rad = spectral_radius(growth_matrix(p));
        if (rad > rep.worst_radius) {
            rep.worst_radius = rad;
            rep.worst_theta = p.theta;
        }
    }
    rep.radius_ok = rep.worst_radius <= Scalar(1) + Scalar(kRadiusTolerance);
    return rep;
}

// ---------------------------------------------------------------------------
// The 1D staggered scheme itself.

template <typename Scalar>
struct Scheme1DState {
    Eigen::Array<Scalar, Eigen::Dynamic, 1> r;  ///< at (m + 1/2) h
    Eigen::Array<Scalar, Eigen::Dynamic, 1> j;  ///< at m h
};

template <typename Scalar>
Scheme1DState<Scalar> scheme_1d_step(const Scheme1DState<Scalar>& s, const GrowthParams<Scalar>& p) {
    validate(p);
    const Eigen::Index n = s.r.size();
    if (s.j.size() != n || n < 2) throw ShapeMismatch("scheme_1d_step: r and j must have equal length >= 2");
    using Arr = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

    // (D j) at r-point m: (j[m+1] - j[m]) / h
    auto dj = [&](const Arr& j) {
        Arr out(n);
        out.head(n - 1) = j.tail(n - 1) - j.head(n - 1);
        out(n - 1) = j(0) - j(n - 1);
        return Arr(out / p.h);
    };
    // (D r) at j-point m: (r[m] - r[m-1]) / h
    auto dr = [&](const Arr& r) {
        Arr out(n);
        out.tail(n - 1) = r.tail(n - 1) - r.head(n - 1);
        out(0) = r(0) - r(n - 1);
        return Arr(out / p.h);
    };

    const Scalar eps2 = p.epsilon * p.epsilon;
    const Scalar denom = eps2 + p.sigma_s * p.dt;
    Scheme1DState<Scalar> out;
    out.r = s.r - p.dt * (dj(s.j) + p.sigma_a * s.r);
    const Arr j_half = s.j - p.dt * (p.phi * dr(s.r) + p.sigma_a * s.j);
    out.j = (eps2 / denom) * j_half - (p.dt / denom) * (Scalar(1) - eps2 * p.phi) * dr(out.r);
    if (!out.r.allFinite() || !out.j.allFinite()) {
        throw NumericOverflow("scheme_1d_step: nonfinite state", 0, 0.0);
    }
    return out;
}

}  // namespace apstag
