#pragma once

// Reference solver for the limiting diffusion equation
//     d_t rho = 1/2 div(1/sigma_t grad rho) - sigma_a rho + Q
// on the R-grid with the compact five-point stencil. Fluxes between two
// R-points of the same plane are located at the J-point between them, so the
// flux form reuses the staggered differences and keeps vertex and center
// planes decoupled.

#include <algorithm>
#include <cmath>
#include <limits>

#include "apstag/errors.hpp"
#include "apstag/grid.hpp"
#include "apstag/material.hpp"
#include "apstag/source.hpp"

namespace apstag {

template <typename Scalar>
struct DiffusionState {
    RField<Scalar> rho;
    Scalar t = 0;
};

template <typename Scalar>
JField<Scalar> inverse_sigma_t_J(const MaterialField<Scalar>& mat, Scalar epsilon) {
    const JField<Scalar> st = mat.sigma_t_J(epsilon);
    if (!(st.hface.minCoeff() > 0 && st.vface.minCoeff() > 0)) {
        throw InvalidMaterial("diffusion: sigma_t must be positive at every flux point");
    }
    return {st.hface.inverse(), st.vface.inverse()};
}

namespace detail {

template <typename Scalar>
void diffusion_rhs_into(const RField<Scalar>& rho, const JField<Scalar>& inv_st, const RField<Scalar>& sigma_a,
                        const GridGeometry<Scalar>& g, JField<Scalar>& flux, RField<Scalar>& div,
                        RField<Scalar>& out) {
    dRx_at_J_into(rho, g, flux);
    flux.hface *= inv_st.hface;
    flux.vface *= inv_st.vface;
    dJx_at_R_into(flux, g, out);

    dRy_at_J_into(rho, g, flux);
    flux.hface *= inv_st.hface;
    flux.vface *= inv_st.vface;
    dJy_at_R_into(flux, g, div);

    out.vertex = Scalar(0.5) * (out.vertex + div.vertex) - sigma_a.vertex * rho.vertex;
    out.center = Scalar(0.5) * (out.center + div.center) - sigma_a.center * rho.center;
}

}  // namespace detail

/// 1/2 [Dx(1/sigma_t Dx rho) + Dy(1/sigma_t Dy rho)] - sigma_a rho + Q, with
/// 1/sigma_t taken at the flux midpoints. sigma_t = sigma_s + eps^2 sigma_a.
template <typename Scalar>
RField<Scalar> diffusion_rhs(const RField<Scalar>& rho, const MaterialField<Scalar>& mat,
                             const GridGeometry<Scalar>& g, const RField<Scalar>* q = nullptr,
                             Scalar epsilon = 0) {
    require_conforms(rho, g, "diffusion_rhs");
    if (!mat.conforms(g)) throw ShapeMismatch("diffusion_rhs: material does not match the grid");
    mat.validate();
    const auto inv_st = inverse_sigma_t_J(mat, epsilon);
    auto flux = JField<Scalar>::zeros(g);
    auto div = RField<Scalar>::zeros(g);
    auto out = RField<Scalar>::zeros(g);
    detail::diffusion_rhs_into(rho, inv_st, mat.sigma_a_R, g, flux, div, out);
    if (q) {
        require_conforms(*q, g, "diffusion_rhs");
        out += *q;
    }
    return out;
}

/// Explicit Euler step size 0.4 h^2 sigma_t_min.
template <typename Scalar>
Scalar diffusion_timestep(const MaterialField<Scalar>& mat, const GridGeometry<Scalar>& g, Scalar epsilon = 0) {
    const Scalar st = mat.sigma_t_min(epsilon);
    if (!(st > 0)) throw InvalidMaterial("diffusion: sigma_t must be positive");
    return Scalar(0.4) * g.h() * g.h() * st;
}

/// Integrates to t_final with explicit Euler, landing exactly on t_final.
/// The source must be isotropic; it is read from parity 0, direction 0.
template <typename Scalar, typename OnStep>
DiffusionState<Scalar> diffusion_run(RField<Scalar> rho, const MaterialField<Scalar>& mat,
                                     const GridGeometry<Scalar>& g, Scalar t_final,
                                     const SourceTerm<Scalar>& src, Scalar epsilon, OnStep&& on_step) {
    if (!(t_final >= 0)) throw InvalidArgument("diffusion_run: t_final must be nonnegative");
    require_conforms(rho, g, "diffusion_run");
    if (!mat.conforms(g)) throw ShapeMismatch("diffusion_run: material does not match the grid");
    if (!src.isotropic()) throw InvalidArgument("diffusion_run: source must be isotropic");
    mat.validate();
    src.check(g, src.even.empty() ? 0 : static_cast<Eigen::Index>(src.even.front().coeff[0].size()));

    DiffusionState<Scalar> s{std::move(rho), Scalar(0)};
    const Scalar dt = diffusion_timestep(mat, g, epsilon);
    const auto inv_st = inverse_sigma_t_J(mat, epsilon);
    auto flux = JField<Scalar>::zeros(g);
    auto div = RField<Scalar>::zeros(g);
    auto rhs = RField<Scalar>::zeros(g);
    auto q = RField<Scalar>::zeros(g);

    std::size_t k = 0;
    on_step(k, s);
    while (s.t < t_final) {
        const Scalar remaining = t_final - s.t;
        const bool lands = remaining <= dt * (Scalar(1) + Scalar(1e-10));
        const Scalar h = lands ? remaining : dt;
        detail::diffusion_rhs_into(s.rho, inv_st, mat.sigma_a_R, g, flux, div, rhs);
        if (!src.even.empty()) {
            src.even_into(s.t, 0, 0, q);
            rhs += q;
        }
        s.rho.vertex += h * rhs.vertex;
        s.rho.center += h * rhs.center;
        s.t = lands ? t_final : s.t + h;
        ++k;
        if (!s.rho.all_finite()) throw NumericOverflow("diffusion_run: nonfinite density", k, double(s.t));
        on_step(k, s);
    }
    return s;
}

template <typename Scalar>
DiffusionState<Scalar> diffusion_run(RField<Scalar> rho, const MaterialField<Scalar>& mat,
                                     const GridGeometry<Scalar>& g, Scalar t_final,
                                     const SourceTerm<Scalar>& src = {}, Scalar epsilon = 0) {
    return diffusion_run(std::move(rho), mat, g, t_final, src, epsilon,
                         [](std::size_t, const DiffusionState<Scalar>&) {});
}

}  // namespace apstag
