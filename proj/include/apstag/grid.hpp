#pragma once

// Staggered periodic grids.
//
// R-type unknowns live on vertices (i,j) and cell centers (i+1/2, j+1/2);
// J-type unknowns live on horizontal faces (i+1/2, j) and vertical faces
// (i, j+1/2). Every family is an nx-by-ny periodic lattice stored as a
// row-major plane indexed (row = j, col = i).
//
//   vertex(j,i)  -> (x0 + i dx,        y0 + j dy)
//   center(j,i)  -> (x0 + (i+1/2) dx,  y0 + (j+1/2) dy)
//   hface(j,i)   -> (x0 + (i+1/2) dx,  y0 + j dy)
//   vface(j,i)   -> (x0 + i dx,        y0 + (j+1/2) dy)

#include <Eigen/Dense>

#include <algorithm>
#include <string>
#include <utility>

#include "apstag/errors.hpp"

namespace apstag {

using Eigen::Index;

template <typename Scalar>
using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
struct GridGeometry {
    Index nx = 2;
    Index ny = 2;
    Scalar x0 = 0;
    Scalar y0 = 0;
    Scalar lx = 1;
    Scalar ly = 1;

    GridGeometry() = default;
    GridGeometry(Index nx_, Index ny_, Scalar x0_, Scalar y0_, Scalar lx_, Scalar ly_)
        : nx(nx_), ny(ny_), x0(x0_), y0(y0_), lx(lx_), ly(ly_) {
        if (nx < 2 || ny < 2) {
            throw InvalidArgument("GridGeometry: need at least 2 cells per axis, got " +
                                  std::to_string(nx) + "x" + std::to_string(ny));
        }
        if (!(lx > 0) || !(ly > 0)) throw InvalidArgument("GridGeometry: extents must be positive");
    }

    /// Square n-by-n grid on [x0, x0+length]^2.
    static GridGeometry square(Index n, Scalar origin, Scalar length) {
        return GridGeometry(n, n, origin, origin, length, length);
    }

    Scalar dx() const { return lx / Scalar(nx); }
    Scalar dy() const { return ly / Scalar(ny); }
    Scalar h() const { return std::min(dx(), dy()); }
    /// Control volume attached to every R- and J-point.
    Scalar point_volume() const { return dx() * dy() / Scalar(2); }

    Scalar vertex_x(Index i) const { return x0 + Scalar(i) * dx(); }
    Scalar vertex_y(Index j) const { return y0 + Scalar(j) * dy(); }
    Scalar center_x(Index i) const { return x0 + (Scalar(i) + Scalar(0.5)) * dx(); }
    Scalar center_y(Index j) const { return y0 + (Scalar(j) + Scalar(0.5)) * dy(); }

    bool operator==(const GridGeometry&) const = default;
};

enum class PlaneKind { vertex, center, hface, vface };

inline const char* to_string(PlaneKind k) {
    switch (k) {
        case PlaneKind::vertex: return "vertex";
        case PlaneKind::center: return "center";
        case PlaneKind::hface: return "hface";
        case PlaneKind::vface: return "vface";
    }
    return "?";
}

/// Physical coordinates of entry (j,i) of a plane of the given kind.
template <typename Scalar>
std::pair<Scalar, Scalar> plane_coords(const GridGeometry<Scalar>& g, PlaneKind k, Index i, Index j) {
    switch (k) {
        case PlaneKind::vertex: return {g.vertex_x(i), g.vertex_y(j)};
        case PlaneKind::center: return {g.center_x(i), g.center_y(j)};
        case PlaneKind::hface: return {g.center_x(i), g.vertex_y(j)};
        case PlaneKind::vface: return {g.vertex_x(i), g.center_y(j)};
    }
    return {Scalar(0), Scalar(0)};
}

template <typename Scalar>
struct RField {
    Plane<Scalar> vertex;
    Plane<Scalar> center;

    static RField constant(const GridGeometry<Scalar>& g, Scalar value) {
        return {Plane<Scalar>::Constant(g.ny, g.nx, value), Plane<Scalar>::Constant(g.ny, g.nx, value)};
    }
    static RField zeros(const GridGeometry<Scalar>& g) { return constant(g, Scalar(0)); }
    static RField zeros_like(const RField& other) {
        return {Plane<Scalar>::Zero(other.vertex.rows(), other.vertex.cols()),
                Plane<Scalar>::Zero(other.center.rows(), other.center.cols())};
    }

    bool conforms(const GridGeometry<Scalar>& g) const {
        return vertex.rows() == g.ny && vertex.cols() == g.nx && center.rows() == g.ny &&
               center.cols() == g.nx;
    }
    bool all_finite() const { return vertex.allFinite() && center.allFinite(); }
    Scalar sum() const { return vertex.sum() + center.sum(); }
    Scalar max_abs() const { return std::max(vertex.abs().maxCoeff(), center.abs().maxCoeff()); }
    Scalar min_coeff() const { return std::min(vertex.minCoeff(), center.minCoeff()); }
    Scalar max_coeff() const { return std::max(vertex.maxCoeff(), center.maxCoeff()); }

    RField& operator+=(const RField& o) { vertex += o.vertex; center += o.center; return *this; }
    RField& operator-=(const RField& o) { vertex -= o.vertex; center -= o.center; return *this; }
    RField& operator*=(Scalar s) { vertex *= s; center *= s; return *this; }
    friend RField operator+(RField a, const RField& b) { return a += b; }
    friend RField operator-(RField a, const RField& b) { return a -= b; }
    friend RField operator*(Scalar s, RField a) { return a *= s; }
};

template <typename Scalar>
struct JField {
    Plane<Scalar> hface;
    Plane<Scalar> vface;

    static JField constant(const GridGeometry<Scalar>& g, Scalar value) {
        return {Plane<Scalar>::Constant(g.ny, g.nx, value), Plane<Scalar>::Constant(g.ny, g.nx, value)};
    }
    static JField zeros(const GridGeometry<Scalar>& g) { return constant(g, Scalar(0)); }

    bool conforms(const GridGeometry<Scalar>& g) const {
        return hface.rows() == g.ny && hface.cols() == g.nx && vface.rows() == g.ny &&
               vface.cols() == g.nx;
    }
    bool all_finite() const { return hface.allFinite() && vface.allFinite(); }
    Scalar sum() const { return hface.sum() + vface.sum(); }
    Scalar max_abs() const { return std::max(hface.abs().maxCoeff(), vface.abs().maxCoeff()); }

    JField& operator+=(const JField& o) { hface += o.hface; vface += o.vface; return *this; }
    JField& operator-=(const JField& o) { hface -= o.hface; vface -= o.vface; return *this; }
    JField& operator*=(Scalar s) { hface *= s; vface *= s; return *this; }
    friend JField operator+(JField a, const JField& b) { return a += b; }
    friend JField operator-(JField a, const JField& b) { return a -= b; }
    friend JField operator*(Scalar s, JField a) { return a *= s; }
};

template <typename Scalar>
bool same_shape(const RField<Scalar>& a, const RField<Scalar>& b) {
    return a.vertex.rows() == b.vertex.rows() && a.vertex.cols() == b.vertex.cols() &&
           a.center.rows() == b.center.rows() && a.center.cols() == b.center.cols();
}

template <typename Scalar>
void require_conforms(const RField<Scalar>& f, const GridGeometry<Scalar>& g, const char* who) {
    if (!f.conforms(g)) throw ShapeMismatch(std::string(who) + ": R-field does not match the grid");
}

template <typename Scalar>
void require_conforms(const JField<Scalar>& f, const GridGeometry<Scalar>& g, const char* who) {
    if (!f.conforms(g)) throw ShapeMismatch(std::string(who) + ": J-field does not match the grid");
}

// Periodic one-sided differences of a plane; `out` must already be sized.
namespace stencil {

/// out(j,i) = p(j,i) - p(j,i-1)
template <typename Scalar>
void backward_x(const Plane<Scalar>& p, Plane<Scalar>& out) {
    const Index n = p.cols();
    out.rightCols(n - 1) = p.rightCols(n - 1) - p.leftCols(n - 1);
    out.col(0) = p.col(0) - p.col(n - 1);
}

/// out(j,i) = p(j,i+1) - p(j,i)
template <typename Scalar>
void forward_x(const Plane<Scalar>& p, Plane<Scalar>& out) {
    const Index n = p.cols();
    out.leftCols(n - 1) = p.rightCols(n - 1) - p.leftCols(n - 1);
    out.col(n - 1) = p.col(0) - p.col(n - 1);
}

/// out(j,i) = p(j,i) - p(j-1,i)
template <typename Scalar>
void backward_y(const Plane<Scalar>& p, Plane<Scalar>& out) {
    const Index n = p.rows();
    out.bottomRows(n - 1) = p.bottomRows(n - 1) - p.topRows(n - 1);
    out.row(0) = p.row(0) - p.row(n - 1);
}

/// out(j,i) = p(j+1,i) - p(j,i)
template <typename Scalar>
void forward_y(const Plane<Scalar>& p, Plane<Scalar>& out) {
    const Index n = p.rows();
    out.topRows(n - 1) = p.bottomRows(n - 1) - p.topRows(n - 1);
    out.row(n - 1) = p.row(0) - p.row(n - 1);
}

}  // namespace stencil

// The four half-grid centered differences. The `_into` variants write into a
// preallocated field and are what the time stepper uses.

template <typename Scalar>
void dJx_at_R_into(const JField<Scalar>& j, const GridGeometry<Scalar>& g, RField<Scalar>& out) {
    stencil::backward_x(j.hface, out.vertex);
    stencil::forward_x(j.vface, out.center);
    out *= Scalar(1) / g.dx();
}

template <typename Scalar>
void dJy_at_R_into(const JField<Scalar>& j, const GridGeometry<Scalar>& g, RField<Scalar>& out) {
    stencil::backward_y(j.vface, out.vertex);
    stencil::forward_y(j.hface, out.center);
    out *= Scalar(1) / g.dy();
}

template <typename Scalar>
void dRx_at_J_into(const RField<Scalar>& r, const GridGeometry<Scalar>& g, JField<Scalar>& out) {
    stencil::forward_x(r.vertex, out.hface);
    stencil::backward_x(r.center, out.vface);
    out *= Scalar(1) / g.dx();
}

template <typename Scalar>
void dRy_at_J_into(const RField<Scalar>& r, const GridGeometry<Scalar>& g, JField<Scalar>& out) {
    stencil::backward_y(r.center, out.hface);
    stencil::forward_y(r.vertex, out.vface);
    out *= Scalar(1) / g.dy();
}

/// x-difference of J-values at R-points: horizontal faces feed vertices,
/// vertical faces feed centers.
template <typename Scalar>
RField<Scalar> dJx_at_R(const JField<Scalar>& j, const GridGeometry<Scalar>& g) {
    require_conforms(j, g, "dJx_at_R");
    auto out = RField<Scalar>::zeros(g);
    dJx_at_R_into(j, g, out);
    return out;
}

/// y-difference of J-values at R-points: vertical faces feed vertices,
/// horizontal faces feed centers.
template <typename Scalar>
RField<Scalar> dJy_at_R(const JField<Scalar>& j, const GridGeometry<Scalar>& g) {
    require_conforms(j, g, "dJy_at_R");
    auto out = RField<Scalar>::zeros(g);
    dJy_at_R_into(j, g, out);
    return out;
}

template <typename Scalar>
JField<Scalar> dRx_at_J(const RField<Scalar>& r, const GridGeometry<Scalar>& g) {
    require_conforms(r, g, "dRx_at_J");
    auto out = JField<Scalar>::zeros(g);
    dRx_at_J_into(r, g, out);
    return out;
}

template <typename Scalar>
JField<Scalar> dRy_at_J(const RField<Scalar>& r, const GridGeometry<Scalar>& g) {
    require_conforms(r, g, "dRy_at_J");
    auto out = JField<Scalar>::zeros(g);
    dRy_at_J_into(r, g, out);
    return out;
}

template <typename Scalar, typename Fn>
Plane<Scalar> sample_plane(Fn&& fn, const GridGeometry<Scalar>& g, PlaneKind kind) {
    Plane<Scalar> p(g.ny, g.nx);
    for (Index j = 0; j < g.ny; ++j) {
        for (Index i = 0; i < g.nx; ++i) {
            auto [x, y] = plane_coords(g, kind, i, j);
            p(j, i) = fn(x, y);
        }
    }
    return p;
}

template <typename Scalar, typename Fn>
RField<Scalar> sample_on_R(Fn&& fn, const GridGeometry<Scalar>& g) {
    return {sample_plane<Scalar>(fn, g, PlaneKind::vertex), sample_plane<Scalar>(fn, g, PlaneKind::center)};
}

template <typename Scalar, typename Fn>
JField<Scalar> sample_on_J(Fn&& fn, const GridGeometry<Scalar>& g) {
    return {sample_plane<Scalar>(fn, g, PlaneKind::hface), sample_plane<Scalar>(fn, g, PlaneKind::vface)};
}

/// Sum over both planes of a times b (used for discrete inner products).
template <typename Scalar>
Scalar dot(const RField<Scalar>& a, const RField<Scalar>& b) {
    return (a.vertex * b.vertex).sum() + (a.center * b.center).sum();
}

template <typename Scalar>
Scalar dot(const JField<Scalar>& a, const JField<Scalar>& b) {
    return (a.hface * b.hface).sum() + (a.vface * b.vface).sum();
}

}  // namespace apstag
