#pragma once

// Fused row kernels for the time stepper. Each sweeps the four planes of one
// parity once instead of materializing the differences, which keeps the
// explicit loop memory-bound on a single core. Results match the composition
// of the difference operators in grid.hpp up to roundoff.

#include "apstag/grid.hpp"

namespace apstag::kernel {

template <typename Scalar>
struct TransportArgs {
    Scalar ax = 0;      ///< xi / dx
    Scalar ay = 0;      ///< -+eta / dy
    Scalar dt = 0;
    Scalar dt_phi = 0;
    const RField<Scalar>* sigma_a_R = nullptr;
    const JField<Scalar>* sigma_a_J = nullptr;
    const RField<Scalar>* q_R = nullptr;   ///< Q_even
    const JField<Scalar>* q_J = nullptr;   ///< Q_odd / eps
};

namespace detail {

// Calls body(i, i-1, i+1) with periodic neighbours, keeping the interior loop
// free of index arithmetic.
template <typename Body>
inline void for_each_col(Index nx, Body&& body) {
    body(Index(0), nx - 1, Index(1) % nx);
#if defined(__GNUC__) && !defined(__clang__)
#pragma GCC ivdep
#endif
    for (Index i = 1; i < nx - 1; ++i) body(i, i - 1, i + 1);
    if (nx > 1) body(nx - 1, nx - 2, Index(0));
}

template <typename Scalar, bool Absorb, bool SourceR, bool SourceJ>
void transport(const RField<Scalar>& r, const JField<Scalar>& j, RField<Scalar>& r_out, JField<Scalar>& j_out,
               const TransportArgs<Scalar>& a) {
    const Index nx = r.vertex.cols();
    const Index ny = r.vertex.rows();
    const Scalar ax = a.ax, ay = a.ay, dt = a.dt, dtp = a.dt_phi;
    for (Index row = 0; row < ny; ++row) {
        const Index rm = row == 0 ? ny - 1 : row - 1;
        const Index rp = row == ny - 1 ? 0 : row + 1;
        const Index o = row * nx;
        const Scalar* V0 = r.vertex.data() + o;
        const Scalar* Vp = r.vertex.data() + rp * nx;
        const Scalar* C0 = r.center.data() + o;
        const Scalar* Cm = r.center.data() + rm * nx;
        const Scalar* H0 = j.hface.data() + o;
        const Scalar* Hp = j.hface.data() + rp * nx;
        const Scalar* W0 = j.vface.data() + o;
        const Scalar* Wm = j.vface.data() + rm * nx;
        Scalar* V2 = r_out.vertex.data() + o;
        Scalar* C2 = r_out.center.data() + o;
        Scalar* H2 = j_out.hface.data() + o;
        Scalar* W2 = j_out.vface.data() + o;

        const Scalar *saV = nullptr, *saC = nullptr, *saH = nullptr, *saW = nullptr;
        if constexpr (Absorb) {
            saV = a.sigma_a_R->vertex.data() + o;
            saC = a.sigma_a_R->center.data() + o;
            saH = a.sigma_a_J->hface.data() + o;
            saW = a.sigma_a_J->vface.data() + o;
        }
        const Scalar *qV = nullptr, *qC = nullptr, *qH = nullptr, *qW = nullptr;
        if constexpr (SourceR) {
            qV = a.q_R->vertex.data() + o;
            qC = a.q_R->center.data() + o;
        }
        if constexpr (SourceJ) {
            qH = a.q_J->hface.data() + o;
            qW = a.q_J->vface.data() + o;
        }

        for_each_col(nx, [&](Index i, Index im, Index ip) {
            Scalar v = V0[i] - dt * (ax * (H0[i] - H0[im]) + ay * (W0[i] - Wm[i]));
            Scalar c = C0[i] - dt * (ax * (W0[ip] - W0[i]) + ay * (Hp[i] - H0[i]));
            Scalar h = H0[i] - dtp * (ax * (V0[ip] - V0[i]) + ay * (C0[i] - Cm[i]));
            Scalar w = W0[i] - dtp * (ax * (C0[i] - C0[im]) + ay * (Vp[i] - V0[i]));
            if constexpr (Absorb) {
                v -= dt * saV[i] * V0[i];
                c -= dt * saC[i] * C0[i];
                h -= dt * saH[i] * H0[i];
                w -= dt * saW[i] * W0[i];
            }
            if constexpr (SourceR) {
                v += dt * qV[i];
                c += dt * qC[i];
            }
            if constexpr (SourceJ) {
                h += dt * qH[i];
                w += dt * qW[i];
            }
            V2[i] = v;
            C2[i] = c;
            H2[i] = h;
            W2[i] = w;
        });
    }
}

}  // namespace detail

/// Explicit Euler transport of one parity: reads (r, j), writes (r_out, j_out).
/// Output fields must be sized and must not alias the inputs.
template <typename Scalar>
void transport(const RField<Scalar>& r, const JField<Scalar>& j, RField<Scalar>& r_out, JField<Scalar>& j_out,
               const TransportArgs<Scalar>& a) {
    const bool absorb = a.sigma_a_R && a.sigma_a_J;
    const int mask = (absorb ? 1 : 0) | (a.q_R ? 2 : 0) | (a.q_J ? 4 : 0);
    switch (mask) {
        case 0: detail::transport<Scalar, false, false, false>(r, j, r_out, j_out, a); break;
        case 1: detail::transport<Scalar, true, false, false>(r, j, r_out, j_out, a); break;
        case 2: detail::transport<Scalar, false, true, false>(r, j, r_out, j_out, a); break;
        case 3: detail::transport<Scalar, true, true, false>(r, j, r_out, j_out, a); break;
        case 4: detail::transport<Scalar, false, false, true>(r, j, r_out, j_out, a); break;
        case 5: detail::transport<Scalar, true, false, true>(r, j, r_out, j_out, a); break;
        case 6: detail::transport<Scalar, false, true, true>(r, j, r_out, j_out, a); break;
        default: detail::transport<Scalar, true, true, true>(r, j, r_out, j_out, a); break;
    }
}

/// j = keep * j - drive * (ax Dx r + ay Dy r) in place, with ax = xi/dx and
/// ay = -+eta/dy already folded in (the plain differences are used).
template <typename Scalar>
void relax_odd(const RField<Scalar>& r, JField<Scalar>& j, const JField<Scalar>& keep, const JField<Scalar>& drive,
               Scalar ax, Scalar ay) {
    const Index nx = r.vertex.cols();
    const Index ny = r.vertex.rows();
    for (Index row = 0; row < ny; ++row) {
        const Index rm = row == 0 ? ny - 1 : row - 1;
        const Index rp = row == ny - 1 ? 0 : row + 1;
        const Index o = row * nx;
        const Scalar* V0 = r.vertex.data() + o;
        const Scalar* Vp = r.vertex.data() + rp * nx;
        const Scalar* C0 = r.center.data() + o;
        const Scalar* Cm = r.center.data() + rm * nx;
        const Scalar* kH = keep.hface.data() + o;
        const Scalar* kW = keep.vface.data() + o;
        const Scalar* dH = drive.hface.data() + o;
        const Scalar* dW = drive.vface.data() + o;
        Scalar* H = j.hface.data() + o;
        Scalar* W = j.vface.data() + o;
        detail::for_each_col(nx, [&](Index i, Index im, Index ip) {
            H[i] = kH[i] * H[i] - dH[i] * (ax * (V0[ip] - V0[i]) + ay * (C0[i] - Cm[i]));
            W[i] = kW[i] * W[i] - dW[i] * (ax * (C0[i] - C0[im]) + ay * (Vp[i] - V0[i]));
        });
    }
}

}  // namespace apstag::kernel
